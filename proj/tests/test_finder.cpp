#include <cmath>

#include <gtest/gtest.h>

#include "radshoot/finder.hpp"

using namespace radshoot;

namespace {

const auto quad = NonlinearitySpec::power_minus_linear(2.0);

// Fixed-step RK4 shooting for u'' + 3/r u' + u^2 - u = 0: +1 when u crosses
// zero first, -1 when u' turns positive first.
int rk4_outcome(double alpha) {
  const double h = 1e-3;
  double r = h;
  double u = alpha - (alpha * alpha - alpha) * h * h / 8.0;
  double v = -(alpha * alpha - alpha) * h / 4.0;
  auto acc = [](double rr, double uu, double vv) { return -3.0 / rr * vv - (uu * uu - uu); };
  while (r < 60.0) {
    const double k1u = v, k1v = acc(r, u, v);
    const double k2u = v + h / 2 * k1v, k2v = acc(r + h / 2, u + h / 2 * k1u, v + h / 2 * k1v);
    const double k3u = v + h / 2 * k2v, k3v = acc(r + h / 2, u + h / 2 * k2u, v + h / 2 * k2v);
    const double k4u = v + h * k3v, k4v = acc(r + h, u + h * k3u, v + h * k3v);
    u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
    v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    r += h;
    if (u < 0.0) return 1;
    if (v > 0.0) return -1;
  }
  return 0;
}

double rk4_ground_state() {
  double a = 5.0, b = 12.0;
  for (int i = 0; i < 30; ++i) {
    const double m = 0.5 * (a + b);
    (rk4_outcome(m) < 0 ? a : b) = m;
  }
  return 0.5 * (a + b);
}

NonlinearitySpec fixture() {
  return NonlinearitySpec::piecewise_linear({{0, 0}, {0.3, -4}, {0.6, 0}, {0.75, 16}, {0.9, 0.2}, {1, 0},
                                             {1.5, -1}, {2, 0}, {29, 0.037}, {31, 0.36}, {40, 0}});
}

}  // namespace

TEST(Finder, GroundStateAgainstIndependentShooting) {
  const auto bs = find_ground_state(quad, 4, 1.5, 12.0);
  const double oracle = rk4_ground_state();
  EXPECT_NEAR(bs.alpha(), oracle, 1e-5);
  EXPECT_NEAR(bs.alpha(), 8.672, 1e-2);
  EXPECT_EQ(bs.c_lo.kind, ShotKind::P);
  EXPECT_EQ(bs.c_hi.kind, ShotKind::N);
  EXPECT_LE(bs.hi - bs.lo, 1e-10 * bs.hi);
}

TEST(Finder, TighterToleranceNarrowsTheBracket) {
  FinderOptions o;
  o.alpha_tol = 1e-6;
  const auto coarse = find_ground_state(quad, 4, 1.5, 12.0, o);
  o.alpha_tol = 1e-7;
  const auto fine = find_ground_state(quad, 4, 1.5, 12.0, o);
  EXPECT_LT(fine.hi - fine.lo, coarse.hi - coarse.lo);
  EXPECT_GE(fine.lo, coarse.lo);
  EXPECT_LE(fine.hi, coarse.hi);
}

TEST(Finder, SweepSeesTheGroundStateTransition) {
  const auto map = sweep(quad, 4, 1.5, 12.0, 40);
  ASSERT_EQ(map.transitions.size(), 1u);
  EXPECT_LT(map.transitions[0].lo, 8.672);
  EXPECT_GT(map.transitions[0].hi, 8.672);
}

TEST(Finder, BracketBrokenWhenEndpointsAgree) {
  try {
    bisect_bound_state(quad, 4, 2.0, 5.0, 0);
    FAIL() << "expected BracketBroken";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BracketBroken);
  }
}

TEST(Finder, SequenceIsIncreasing) {
  const auto seq = find_bound_state_sequence(quad, 4, 2, 1.5, 150.0, 150);
  ASSERT_EQ(seq.size(), 3u);
  EXPECT_NEAR(seq[0].alpha(), 8.6719343, 1e-6);
  EXPECT_LT(seq[0].hi, seq[1].lo);
  EXPECT_LT(seq[1].hi, seq[2].lo);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(seq[k].k, k);
    EXPECT_GE(node_count(seq[k].witness), k);
  }
}

TEST(Finder, NotFoundOutsideTheRange) {
  try {
    find_kth_bound_state(quad, 4, 0, 1.5, 5.0, 20);
    FAIL() << "expected NotFound";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotFound);
  }
}

TEST(Finder, MultiplicityNeedsTwoHumpLandscape) {
  const auto L = analyze_landscape(quad);
  EXPECT_THROW(multiplicity_scan(quad, L, 4, 0), Error);
}

TEST(Finder, FixtureHasNoGroundStateInTheWindow) {
  const auto spec = fixture();
  const auto L = analyze_landscape(spec);
  FinderOptions o;
  o.solver.r_max = 2000.0;
  const auto res = multiplicity_scan(spec, L, 2, 0, 100, o);
  EXPECT_TRUE(res.states.empty());
}

TEST(Finder, FixtureHasTwoStatesAtHighNodeCount) {
  const auto spec = fixture();
  const auto L = analyze_landscape(spec);
  FinderOptions o;
  o.solver.r_max = 2000.0;
  const auto res = multiplicity_scan(spec, L, 2, 34, 200, o);
  ASSERT_GE(res.states.size(), 2u);
  for (const auto& s : res.states) {
    EXPECT_GT(s.alpha(), L.beta_star);
    EXPECT_LT(s.alpha(), L.gamma_star);
  }
}

TEST(Finder, TuneJumpFindsTrappedShotInTheWindow) {
  const double a = find_ground_state(quad, 4, 1.5, 12.0).alpha();
  const auto t = tune_jump(quad, a, NonlinearitySpec::power(2.0), 4, {1e-3, 15.0});
  EXPECT_GT(t.alpha2, a + 2.0 * t.eps);
  EXPECT_GE(t.slope, 1e-3);
  EXPECT_LE(t.slope, 15.0);
  EXPECT_EQ(t.cls.kind, ShotKind::P);
  EXPECT_EQ(t.cls.k, 0);
}

TEST(Finder, TuneJumpRejectsBadWindow) {
  try {
    tune_jump(quad, 8.672, NonlinearitySpec::power(2.0), 4, {1.0, 100.0});
    FAIL() << "expected PreconditionFailed";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PreconditionFailed);
  }
}

TEST(Finder, ExampleProducesAlternatingBrackets) {
  const auto rep = run_example();
  ASSERT_TRUE(rep.ok) << rep.failure;
  ASSERT_EQ(rep.brackets.size(), 5u);
  for (std::size_t i = 0; i < rep.classes.size(); ++i) {
    EXPECT_EQ(rep.classes[i].kind, i % 2 == 0 ? ShotKind::P : ShotKind::N) << i;
  }
  for (std::size_t i = 0; i + 1 < rep.brackets.size(); ++i) EXPECT_LT(rep.brackets[i].hi, rep.brackets[i + 1].lo);
  EXPECT_NEAR(rep.brackets[0].alpha(), rep.alpha_star, 1e-8);
  for (const auto& g : rep.gst) EXPECT_NE(g.verdict, GstVerdict::Violated);
}

TEST(Finder, LargeSecondAmplitudeBreaksTheExample) {
  ExampleConfig c;
  c.amp2 = {10, 10, 10, 0.1};
  const auto rep = run_example(c);
  EXPECT_FALSE(rep.ok);
  EXPECT_EQ(rep.brackets.size(), 2u);
  EXPECT_THROW(reproduce_example(c), Error);
}

TEST(Finder, WiderBridgesStillAlternate) {
  for (double eps : {0.3, 1.0}) {
    ExampleConfig c;
    c.eps = eps;
    const auto rep = run_example(c);
    EXPECT_TRUE(rep.ok) << eps << " " << rep.failure;
    EXPECT_EQ(rep.brackets.size(), 5u) << eps;
  }
}
