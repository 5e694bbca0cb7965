#include <gtest/gtest.h>

#include "radshoot/conditions.hpp"

using namespace radshoot;

TEST(Conditions, QuadraticMinusLinear) {
  const auto r = check_shape_conditions(NonlinearitySpec::power_minus_linear(2.0), 4);
  EXPECT_EQ(r.verdict("C1"), Verdict::Pass);
  EXPECT_EQ(r.verdict("H1"), Verdict::Pass);
  EXPECT_EQ(r.verdict("H2"), Verdict::Pass);
  EXPECT_EQ(r.verdict("H3"), Verdict::Pass);
  EXPECT_EQ(r.verdict("A5"), Verdict::SampledOnly);
  EXPECT_EQ(r.verdict("GST"), Verdict::SampledOnly);
}

TEST(Conditions, SupercriticalPowerHasNegativeQ) {
  const auto r = check_shape_conditions(NonlinearitySpec::power(4.0), 4);
  EXPECT_LT(r.q_max, 0.0);
  EXPECT_EQ(r.verdict("C1"), Verdict::Fail);
  EXPECT_EQ(r.verdict("A5"), Verdict::Fail);
}

TEST(Conditions, SubcriticalPowerHasPositiveQ) {
  const auto r = check_shape_conditions(NonlinearitySpec::power(2.0), 4);
  EXPECT_GT(r.q_min, 0.0);
}

TEST(Conditions, ThreeHalvesMinusLinear) {
  const auto r = check_shape_conditions(NonlinearitySpec::power_minus_linear(1.5), 4);
  EXPECT_EQ(r.verdict("C1"), Verdict::Pass);
  EXPECT_EQ(r.verdict("H3"), Verdict::Pass);
}

TEST(Conditions, TwoHumpFixture) {
  const auto spec = NonlinearitySpec::piecewise_linear({{0, 0}, {0.3, -4}, {0.6, 0}, {0.75, 16}, {0.9, 0.2}, {1, 0},
                                                        {1.5, -1}, {2, 0}, {29, 0.037}, {31, 0.36}, {40, 0}});
  const auto r = check_shape_conditions(spec, 2);
  for (const char* c : {"A1", "A2", "A3", "A4", "A5"}) EXPECT_EQ(r.verdict(c), Verdict::Pass) << c;
  // f turns negative again after the first hump.
  EXPECT_EQ(r.verdict("C1"), Verdict::Fail);
}

TEST(Conditions, SeedJittersButAgrees) {
  ConditionOptions o;
  o.seed = 12345;
  const auto a = check_shape_conditions(NonlinearitySpec::power_minus_linear(2.0), 4, o);
  const auto b = check_shape_conditions(NonlinearitySpec::power_minus_linear(2.0), 4, o);
  EXPECT_EQ(to_json(a), to_json(b));
  EXPECT_EQ(a.verdict("H2"), Verdict::Pass);
}
