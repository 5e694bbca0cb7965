#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "radshoot/landscape.hpp"

using namespace radshoot;

namespace {

// f = s (s - 0.5)(s - 2)(s - 2.5)(s - 4)(s - 4.2): F has maxima at 2 and 4 with F(4) > F(2) > 0.
NonlinearitySpec two_hump_poly() { return NonlinearitySpec::polynomial({0.0, -42.0, 142.3, -145.95, 65.05, -13.2, 1.0}); }

struct Sampled {
  std::vector<double> s;
  std::vector<double> F;
};

// Trapezoid primitive on a dense grid; independent of the closed forms.
Sampled dense_primitive(const NonlinearitySpec& spec, double top, int n) {
  Sampled out;
  const double h = top / n;
  double acc = 0.0;
  out.s.push_back(0.0);
  out.F.push_back(0.0);
  for (int i = 1; i <= n; ++i) {
    acc += 0.5 * h * (spec.f((i - 1) * h) + spec.f(i * h));
    out.s.push_back(i * h);
    out.F.push_back(acc);
  }
  return out;
}

}  // namespace

TEST(Landscape, QuadraticMinusLinear) {
  const auto L = analyze_landscape(NonlinearitySpec::power_minus_linear(2.0));
  EXPECT_NEAR(L.b, 1.0, 1e-12);
  EXPECT_NEAR(L.beta, 1.5, 1e-12);
  EXPECT_TRUE(L.gamma_seq.empty());
  EXPECT_TRUE(L.cap_touched);
  EXPECT_NEAR(L.F_min_on(0.0, 1.5), -1.0 / 6.0, 1e-12);
}

TEST(Landscape, CubicMinusLinear) {
  const auto L = analyze_landscape(NonlinearitySpec::power_minus_linear(3.0));
  EXPECT_NEAR(L.b, 1.0, 1e-12);
  EXPECT_NEAR(L.beta, std::sqrt(2.0), 1e-12);
}

TEST(Landscape, BetaFormulaForPowers) {
  for (double p : {1.5, 2.5, 4.0}) {
    const auto L = analyze_landscape(NonlinearitySpec::power_minus_linear(p));
    EXPECT_NEAR(L.beta, std::pow((p + 1.0) / 2.0, 1.0 / (p - 1.0)), 1e-11);
  }
}

TEST(Landscape, TwoHumpsAgainstDenseSampling) {
  const auto spec = two_hump_poly();
  const auto L = analyze_landscape(spec);
  ASSERT_EQ(L.gamma_seq.size(), 2u);

  const auto d = dense_primitive(spec, 6.0, 600000);
  std::vector<double> maxima;
  for (std::size_t i = 1; i + 1 < d.s.size(); ++i) {
    if (d.F[i] > d.F[i - 1] && d.F[i] >= d.F[i + 1]) maxima.push_back(d.s[i]);
  }
  ASSERT_EQ(maxima.size(), 2u);
  EXPECT_NEAR(L.gamma_seq[0], maxima[0], 2e-5);
  EXPECT_NEAR(L.gamma_seq[1], maxima[1], 2e-5);
  EXPECT_GT(spec.F(L.gamma_seq[0]), 0.0);
  EXPECT_GT(spec.F(L.gamma_seq[1]), spec.F(L.gamma_seq[0]));

  // beta*: last point above gamma_2 where F returns to F(gamma_2).
  const double target = spec.F(L.gamma_seq[1]);
  double oracle = NAN;
  for (std::size_t i = d.s.size() - 1; i > 0; --i) {
    if (d.s[i] > L.gamma_seq[1] && (d.F[i] - target) * (d.F[i - 1] - target) <= 0.0) {
      oracle = d.s[i];
      break;
    }
  }
  EXPECT_NEAR(L.beta_star, oracle, 1e-4);
  EXPECT_NEAR(spec.F(L.beta_star), target, 1e-10 * std::abs(target));
}

TEST(Landscape, RootsAreTight) {
  const auto spec = NonlinearitySpec::piecewise_linear({{0, 0}, {0.3, -4}, {0.6, 0}, {0.75, 16}, {0.9, 0.2}, {1, 0},
                                                        {1.5, -1}, {2, 0}, {29, 0.037}, {31, 0.36}, {40, 0}});
  const auto L = analyze_landscape(spec);
  // Roots are bisected to 1e-12 relative in s, so the residual is bounded by the slope.
  EXPECT_LE(std::abs(spec.F(L.beta)), 2e-12 * L.beta * std::abs(spec.f(L.beta)) + 1e-14);
  EXPECT_NEAR(L.b, 0.6, 1e-12);
  ASSERT_EQ(L.gamma_seq.size(), 1u);
  EXPECT_NEAR(L.gamma_seq[0], 1.0, 1e-12);
  EXPECT_NEAR(spec.F(L.beta_star) - spec.F(L.gamma_seq.back()), 0.0, 1e-12 * spec.F(L.gamma_seq.back()));
  EXPECT_DOUBLE_EQ(L.gamma_star, 40.0);
  EXPECT_FALSE(L.cap_touched);
  EXPECT_NEAR(L.F_min_on(0.0, L.beta_star), -1.2, 1e-12);
}

TEST(Landscape, NoBeta) {
  const auto spec = NonlinearitySpec::piecewise_linear({{0, 0}, {1, -1}, {2, 0}, {3, 0.1}, {4, 0}});
  try {
    analyze_landscape(spec);
    FAIL() << "expected NoBeta";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoBeta);
  }
}

TEST(Landscape, AmbiguousZero) {
  const auto spec = NonlinearitySpec::piecewise_linear({{0, 0}, {1, -1}, {2, 0}, {3, 0}, {4, 5}});
  try {
    analyze_landscape(spec);
    FAIL() << "expected AmbiguousZero";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AmbiguousZero);
  }
}
