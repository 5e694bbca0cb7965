#include <cmath>

#include <gtest/gtest.h>

#include "radshoot/classifier.hpp"

using namespace radshoot;

namespace {

Trajectory shoot(const NonlinearitySpec& spec, int N, double alpha, int max_crossings, double r_max = 200.0,
                 bool stop_on_trap = true) {
  IVProblem pb{N, alpha, spec, {}};
  pb.options.max_crossings = max_crossings;
  pb.options.r_max = r_max;
  pb.options.stop_on_trap = stop_on_trap;
  return integrate(pb);
}

}  // namespace

TEST(Classifier, SupercriticalPowerIsTrapped) {
  for (double alpha : {2.0, 10.0, 50.0}) {
    const auto c = classify(shoot(NonlinearitySpec::power(4.0), 4, alpha, 1));
    EXPECT_TRUE(c.positive_side()) << alpha << " " << c.label();
    EXPECT_EQ(c.k, 0);
  }
}

TEST(Classifier, SubcriticalPowerCrosses) {
  for (double alpha : {2.0, 10.0, 50.0}) {
    const auto c = classify(shoot(NonlinearitySpec::power(2.0), 4, alpha, 1));
    EXPECT_EQ(c.kind, ShotKind::N) << alpha;
    EXPECT_EQ(c.k, 1);
  }
}

TEST(Classifier, BelowBetaIsTrappedWithoutCrossing) {
  const auto spec = NonlinearitySpec::power_minus_linear(2.0);
  const auto L = analyze_landscape(spec);
  const auto c = classify(shoot(spec, 4, 1.4, 0), L);
  EXPECT_TRUE(c.positive_side());
  EXPECT_EQ(c.k, 0);
}

TEST(Classifier, GroundStateSeparatesTheSets) {
  const auto spec = NonlinearitySpec::power_minus_linear(2.0);
  EXPECT_EQ(classify(shoot(spec, 4, 8.5, 1)).kind, ShotKind::P);
  EXPECT_EQ(classify(shoot(spec, 4, 8.8, 1)).kind, ShotKind::N);
}

TEST(Classifier, NodeCountMatchesFullClassification) {
  const auto spec = NonlinearitySpec::power_minus_linear(2.0);
  for (double alpha : {10.0, 30.0, 60.0, 120.0}) {
    const auto tr = shoot(spec, 4, alpha, 0);
    const auto c = classify(tr);
    EXPECT_EQ(c.k, node_count(tr));
    EXPECT_TRUE(c.positive_side());
  }
}

TEST(Classifier, NoCrossingAfterATrap) {
  const auto spec = NonlinearitySpec::power_minus_linear(2.0);
  for (double alpha : {3.0, 9.0, 20.0, 45.0}) {
    const auto tr = shoot(spec, 4, alpha, 0, 150.0, false);
    bool trapped = false;
    for (const auto& e : tr.events) {
      if (e.kind == EventKind::Trap) trapped = true;
      if (trapped) {
        EXPECT_NE(e.kind, EventKind::ZeroCrossing) << "alpha " << alpha << " r " << e.state.r;
      }
    }
    EXPECT_TRUE(trapped);
  }
}

TEST(Classifier, EvidencePointsAtEvents) {
  const auto spec = NonlinearitySpec::power_minus_linear(2.0);
  const auto tr = shoot(spec, 4, 40.0, 0);
  const auto c = classify(tr);
  ASSERT_FALSE(c.evidence.empty());
  int crossings = 0;
  for (auto i : c.evidence) {
    ASSERT_LT(i, tr.events.size());
    crossings += tr.events[i].kind == EventKind::ZeroCrossing;
  }
  EXPECT_EQ(crossings, c.k);
  EXPECT_EQ(tr.events[c.evidence.back()].kind, EventKind::Trap);
}

TEST(Classifier, RefinementBandsOnTwoHumpFixture) {
  const auto spec = NonlinearitySpec::piecewise_linear({{0, 0}, {0.3, -4}, {0.6, 0}, {0.75, 16}, {0.9, 0.2}, {1, 0},
                                                        {1.5, -1}, {2, 0}, {29, 0.037}, {31, 0.36}, {40, 0}});
  const auto L = analyze_landscape(spec);
  // Low shots settle in (gamma_1, gamma*); shots from the middle of the window fall into the well.
  const auto s = classify(shoot(spec, 2, 35.0, 0, 2000.0), L);
  EXPECT_EQ(s.refinement, Refinement::S);
  EXPECT_EQ(s.band, 1);
  const auto q = classify(shoot(spec, 2, 38.9, 0, 2000.0), L);
  EXPECT_EQ(q.refinement, Refinement::Q);
  EXPECT_GE(q.k, 30);
}

TEST(Classifier, TrivialShot) {
  const auto c = classify(shoot(NonlinearitySpec::power_minus_linear(2.0), 4, 0.0, 0));
  EXPECT_EQ(c.kind, ShotKind::Trivial);
  EXPECT_EQ(c.k, 0);
}

TEST(Classifier, InconclusiveWithoutCertificate) {
  // Too short a horizon to see either a crossing or a trap.
  const auto tr = shoot(NonlinearitySpec::power_minus_linear(2.0), 4, 8.6719, 1, 3.0);
  try {
    classify(tr);
    FAIL() << "expected Inconclusive";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Inconclusive);
  }
}
