#include <array>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "radshoot/classifier.hpp"
#include "radshoot/integrator.hpp"

using namespace radshoot;

namespace {

// Classical RK4 with a tiny fixed step, started from the two-term series.
struct Reference {
  std::vector<double> r, u, du;
};

Reference rk4_reference(const NonlinearitySpec& spec, int N, double alpha, double r_end, double h) {
  const double fa = spec.f(alpha);
  double r = h;
  double u = alpha - fa * h * h / (2.0 * N);
  double v = -fa * h / N;
  auto rhs = [&](double rr, double uu, double vv) {
    return std::array<double, 2>{vv, -(N - 1.0) / rr * vv - spec.f(uu)};
  };
  Reference out;
  while (r < r_end - 0.5 * h) {
    const auto k1 = rhs(r, u, v);
    const auto k2 = rhs(r + h / 2, u + h / 2 * k1[0], v + h / 2 * k1[1]);
    const auto k3 = rhs(r + h / 2, u + h / 2 * k2[0], v + h / 2 * k2[1]);
    const auto k4 = rhs(r + h, u + h * k3[0], v + h * k3[1]);
    u += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    v += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    r += h;
    out.r.push_back(r);
    out.u.push_back(u);
    out.du.push_back(v);
  }
  return out;
}

IVProblem problem(NonlinearitySpec spec, int N, double alpha, double r_max = 12.0) {
  IVProblem pb{N, alpha, std::move(spec), {}};
  pb.options.r_max = r_max;
  pb.options.stop_on_trap = false;
  return pb;
}

}  // namespace

TEST(Integrator, TaylorStartMatchesSeries) {
  auto pb = problem(NonlinearitySpec::power_minus_linear(2.0), 4, 3.0);
  pb.options.h0 = 1e-3;
  const auto t = taylor_start(pb);
  // a2 = -f(alpha)/(2N) = -6/8, a4 = -f'(alpha) a2 / (4 (N+2)) = 5*0.75/24.
  EXPECT_DOUBLE_EQ(t.a2, -0.75);
  EXPECT_NEAR(t.a4, 5.0 * 0.75 / 24.0, 1e-15);
  EXPECT_NEAR(t.state.u, 3.0 - 0.75e-6 + t.a4 * 1e-12, 1e-15);
  EXPECT_LE(t.error_estimate, pb.options.abs_tol);
}

TEST(Integrator, StartRadiusTooLarge) {
  auto pb = problem(NonlinearitySpec::power_minus_linear(2.0), 4, 30.0);
  pb.options.h0 = 0.5;
  try {
    taylor_start(pb);
    FAIL() << "expected StartRadiusTooLarge";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StartRadiusTooLarge);
  }
}

TEST(Integrator, AgreesWithFixedStepReference) {
  struct Case {
    NonlinearitySpec spec;
    int N;
    double alpha;
  };
  const std::vector<Case> cases{{NonlinearitySpec::power_minus_linear(2.0), 4, 5.0},
                                {NonlinearitySpec::power_minus_linear(3.0), 3, 2.0},
                                {NonlinearitySpec::power(1.5), 3, 1.0},
                                {NonlinearitySpec::polynomial({0.0, -1.0, 0.0, 1.0}), 2, 1.8}};
  for (const auto& c : cases) {
    auto pb = problem(c.spec, c.N, c.alpha, 8.0);
    const auto tr = integrate(pb);
    const auto ref = rk4_reference(c.spec, c.N, c.alpha, 8.0, 2e-4);
    for (std::size_t i = 2500; i < ref.r.size(); i += 2500) {
      if (ref.r[i] > tr.r_end) break;
      const auto s = sample_at(tr, ref.r[i]);
      EXPECT_NEAR(s.u, ref.u[i], 1e-7) << "alpha " << c.alpha << " r " << ref.r[i];
      EXPECT_NEAR(s.du, ref.du[i], 1e-7) << "alpha " << c.alpha << " r " << ref.r[i];
    }
  }
}

TEST(Integrator, ConvergesUnderTighterTolerance) {
  const auto spec = NonlinearitySpec::power_minus_linear(2.0);
  std::vector<double> err;
  auto fine = problem(spec, 4, 7.0, 6.0);
  fine.options.rel_tol = 1e-13;
  fine.options.abs_tol = 1e-15;
  const auto ref = integrate(fine);
  for (double tol : {1e-6, 1e-8, 1e-10}) {
    auto pb = problem(spec, 4, 7.0, 6.0);
    pb.options.rel_tol = tol;
    pb.options.abs_tol = tol * 1e-2;
    const auto tr = integrate(pb);
    double e = 0.0;
    for (double r = 0.5; r < 6.0; r += 0.5) e = std::max(e, std::abs(sample_at(tr, r).u - sample_at(ref, r).u));
    err.push_back(e);
  }
  EXPECT_LT(err[1], err[0]);
  EXPECT_LT(err[2], err[1]);
  EXPECT_LT(err[2], 1e-8);
}

TEST(Integrator, ZeroCrossingsAreOnTheCurve) {
  auto pb = problem(NonlinearitySpec::power(2.0), 4, 10.0, 30.0);
  const auto tr = integrate(pb);
  int n = 0;
  for (const auto& e : tr.events) {
    if (e.kind != EventKind::ZeroCrossing) continue;
    ++n;
    EXPECT_LE(std::abs(e.state.u), 1e-10);
    EXPECT_EQ(e.direction, e.state.du > 0 ? 1 : -1);
  }
  EXPECT_GE(n, 2);
}

TEST(Integrator, ZSequenceInterleaves) {
  auto pb = problem(NonlinearitySpec::power(2.0), 4, 10.0, 40.0);
  const auto zs = z_sequence(integrate(pb));
  ASSERT_GE(zs.z.size(), 3u);
  EXPECT_TRUE(zs.interleaved());
}

TEST(Integrator, MonitoredHeightsAreLogged) {
  auto pb = problem(NonlinearitySpec::power_minus_linear(2.0), 4, 9.0, 10.0);
  pb.options.monitor_heights = {8.0, 4.0};
  const auto tr = integrate(pb);
  int hits = 0;
  for (const auto& e : tr.events) {
    if (e.kind == EventKind::HeightCrossing) {
      ++hits;
      EXPECT_NEAR(e.state.u, e.height, 1e-10);
    }
  }
  EXPECT_GE(hits, 2);
}

TEST(Integrator, OddSymmetry) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> a(1.6, 20.0);
  for (int i = 0; i < 5; ++i) {
    const double alpha = a(rng);
    const auto spec = NonlinearitySpec::power_minus_linear(2.0);
    const auto p = integrate(problem(spec, 3, alpha, 10.0));
    const auto m = integrate(problem(spec, 3, -alpha, 10.0));
    ASSERT_EQ(p.samples.size(), m.samples.size());
    for (std::size_t j = 0; j < p.samples.size(); ++j) {
      EXPECT_EQ(p.samples[j].r, m.samples[j].r);
      EXPECT_EQ(p.samples[j].u, -m.samples[j].u);
      EXPECT_EQ(p.samples[j].du, -m.samples[j].du);
    }
  }
}

TEST(Integrator, ZeroInitialValueIsIdenticallyZero) {
  const auto tr = integrate(problem(NonlinearitySpec::power_minus_linear(2.0), 4, 0.0));
  EXPECT_TRUE(tr.identically_zero());
  EXPECT_TRUE(tr.events.empty());
}

TEST(Integrator, StepsNeverStraddleBreakpoints) {
  const auto spec = NonlinearitySpec::piecewise_linear({{0, 0}, {0.5, -1}, {1, 0}, {2, 3}, {6, 10}});
  const auto tr = integrate(problem(spec, 3, 5.0, 20.0));
  for (std::size_t i = 0; i + 1 < tr.samples.size(); ++i) {
    const double a = std::abs(tr.samples[i].u);
    const double b = std::abs(tr.samples[i + 1].u);
    for (double bp : spec.breakpoints()) {
      const double lo = std::min(a, b), hi = std::max(a, b);
      // A breakpoint may only sit at a step end, never strictly inside a step.
      if (lo < bp && bp < hi) {
        EXPECT_LT(std::min(bp - lo, hi - bp), 1e-9 * bp) << "step " << i;
      }
    }
  }
}
