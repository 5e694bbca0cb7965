#include <cstdlib>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "radshoot/config.hpp"
#include "radshoot/io.hpp"

using namespace radshoot;

namespace {

Trajectory shoot(double alpha) {
  IVProblem pb{4, alpha, NonlinearitySpec::power_minus_linear(2.0), {}};
  pb.options.max_crossings = 2;
  pb.options.r_max = 40.0;
  return integrate(pb);
}

std::string csv(const Trajectory& tr) {
  std::ostringstream os;
  write_trajectory_csv(os, tr);
  return os.str();
}

}  // namespace

TEST(Io, TrajectoryCsvRoundTripsExactly) {
  const auto tr = shoot(10.0);
  std::istringstream in(csv(tr));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "r,u,du");
  std::size_t i = 0;
  while (std::getline(in, line)) {
    ASSERT_LT(i, tr.samples.size());
    std::istringstream ls(line);
    std::string a, b, c;
    std::getline(ls, a, ',');
    std::getline(ls, b, ',');
    std::getline(ls, c, ',');
    EXPECT_EQ(std::strtod(a.c_str(), nullptr), tr.samples[i].r);
    EXPECT_EQ(std::strtod(b.c_str(), nullptr), tr.samples[i].u);
    EXPECT_EQ(std::strtod(c.c_str(), nullptr), tr.samples[i].du);
    ++i;
  }
  EXPECT_EQ(i, tr.samples.size());
}

TEST(Io, OutputIsDeterministic) {
  EXPECT_EQ(csv(shoot(12.5)), csv(shoot(12.5)));
  EXPECT_EQ(events_json(shoot(12.5)).dump(), events_json(shoot(12.5)).dump());
}

TEST(Io, EnergyCsvHeader) {
  const auto tr = shoot(5.0);
  std::ostringstream os;
  write_energy_csv(os, energy_series(tr, NonlinearitySpec::power_minus_linear(2.0)));
  EXPECT_EQ(os.str().substr(0, 4), "r,I\n");
}

TEST(Io, ShotClassJson) {
  const auto j = to_json(classify(shoot(10.0)));
  EXPECT_EQ(j["kind"], "P");
  EXPECT_EQ(j["k"], 1);
  EXPECT_TRUE(j["evidence"].is_array());
}

TEST(Io, ConfigParsesSolverAndRange) {
  const auto c = parse_config(R"({
  "nonlinearity": {"knots": [[0, 0], [1, -1], [2, 0], [5, 4]]},
  "N": 3,
  "solver": {"rel_tol": 1e-8, "r_max": 50},
  "range": [2.5, 5],
  "grid": 30
})");
  ASSERT_TRUE(c.nonlinearity.has_value());
  EXPECT_DOUBLE_EQ(c.nonlinearity->f(4.0), 8.0 / 3.0);
  EXPECT_EQ(c.N, 3);
  EXPECT_DOUBLE_EQ(c.solver.rel_tol, 1e-8);
  EXPECT_DOUBLE_EQ(c.solver.r_max, 50.0);
  EXPECT_DOUBLE_EQ(*c.lo, 2.5);
  EXPECT_DOUBLE_EQ(*c.hi, 5.0);
  EXPECT_EQ(c.grid, 30u);
}

TEST(Io, ConfigSyntaxErrorReportsLine) {
  try {
    parse_config("{\n  \"N\": 4,\n  \"grid\": ,\n}");
    FAIL() << "expected Config";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Config);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Io, ConfigRejectsUnknownKey) {
  try {
    parse_config("{\n  \"N\": 4,\n  \"gird\": 10\n}");
    FAIL() << "expected Config";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Config);
    EXPECT_NE(std::string(e.what()).find("gird"), std::string::npos) << e.what();
  }
}

TEST(Io, ConfigLoadsFixtureFiles) {
  const std::string dir = RADSHOOT_FIXTURES;
  const auto c = parse_config(read_file(dir + "/ground.json"), dir);
  ASSERT_TRUE(c.nonlinearity.has_value());
  EXPECT_DOUBLE_EQ(c.nonlinearity->f(3.0), 6.0);
  EXPECT_EQ(c.N, 4);
}

TEST(Io, MissingFileIsAConfigError) {
  try {
    read_file("/nonexistent/radshoot.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Config);
  }
}
