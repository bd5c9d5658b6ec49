#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "qctl/config.hpp"
#include "qctl/objective.hpp"
#include "test_support.hpp"

using namespace qctl;
using namespace qctl::testing;

namespace {

std::string cfg(const std::string& path) { return std::string(QCTL_CONFIG_DIR) + "/" + path; }

const char* kMinimal = R"({
  "problem": {
    "domain": { "x_lo": 0.0, "x_hi": 1.0, "n_x": 10 },
    "time": { "T": 1.0, "n_t": 20 },
    "alpha1": 0.0, "alpha2": 1.0,
    "bounds": { "lower": -1.0, "upper": 1.0 },
    "b2": B2,
    "psi0": { "type": "ground_state" },
    "psi_d": { "type": "zero" }
  }
})";

std::string minimal(const std::string& b2) {
  std::string s = kMinimal;
  s.replace(s.find("B2"), 2, b2);
  return s;
}

}  // namespace

TEST(Config, TrackingConfigMatchesHandBuiltSpec) {
  const RunConfig c = load_config(cfg("singular_arc.json"));
  const ProblemSpec ref = tracking_spec();
  EXPECT_EQ(c.problem.tgrid.n_t, 200);
  EXPECT_EQ(c.problem.grid.size(), 39u);  // interior nodes
  EXPECT_EQ(c.problem.alpha1, -0.01);
  EXPECT_TRUE(c.warnings.empty());
  EXPECT_EQ(c.analysis.n_probe, 100);
  for (double u : {0.0, 0.3, 1.0}) {
    const Control ctl = Control::constant(200, u);
    const double a = reduced_cost(c.problem, ctl), b = reduced_cost(ref, ctl);
    EXPECT_NEAR(a, b, 1e-12 * std::abs(b)) << "u = " << u;
  }
}

TEST(Config, ConvexInstance) {
  const RunConfig c = load_config(cfg("convex_sanity.json"));
  EXPECT_EQ(c.problem.alpha2, 1.0);
  EXPECT_EQ(c.problem.bounds.lower, -1.0);
  ASSERT_TRUE(c.solver.initial.has_value());
  EXPECT_EQ(c.output.dir, "out/convex");
  // same normalized gaussian as the hand-built instance
  const ProblemSpec ref = convex_spec();
  EXPECT_NEAR(norm(c.problem.psi0 - ref.psi0), 0.0, 1e-12);
}

TEST(Config, RefineDoublesTimeSteps) {
  EXPECT_EQ(load_config(cfg("singular_arc.json"), 1).problem.tgrid.n_t, 400);
  EXPECT_EQ(load_config(cfg("singular_arc.json"), 3).problem.tgrid.n_t, 1600);
  EXPECT_THROW(load_config(cfg("singular_arc.json"), -1), ConfigError);
}

TEST(Config, UnknownKeysRejected) {
  std::string s = minimal(R"({ "type": "constant", "value": 0.0 })");
  EXPECT_NO_THROW(parse_config(s));
  std::string bad = s;
  bad.replace(bad.find("\"alpha1\""), 8, "\"alpha_1\"");
  try {
    parse_config(bad);
    FAIL() << "accepted unknown key";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("alpha_1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_config(minimal(R"({ "type": "constant", "value": 0.0, "extra": 1 })")), ConfigError);
  // comments are allowed anywhere
  EXPECT_NO_THROW(parse_config(minimal(R"({ "_comment": "zero", "type": "constant", "value": 0.0 })")));
}

TEST(Config, SyntaxErrorReportsLocation) {
  try {
    parse_config("{\n  \"problem\": {,\n}");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Config, TypeAndRangeErrors) {
  std::string s = minimal(R"({ "type": "constant", "value": "zero" })");
  EXPECT_THROW(parse_config(s), ConfigError);
  EXPECT_THROW(parse_config(minimal(R"({ "type": "quartic", "c": 1 })")), ConfigError);
  std::string neg = minimal(R"({ "type": "constant", "value": 0.0 })");
  neg.replace(neg.find("\"alpha2\": 1.0"), 13, "\"alpha2\": -1.0");
  EXPECT_THROW(parse_config(neg), ConfigError);
  std::string missing = minimal(R"({ "type": "constant", "value": 0.0 })");
  missing.replace(missing.find("\"time\""), 6, "\"tmie\"");
  EXPECT_THROW(parse_config(missing), ConfigError);
}

TEST(Config, SineWarns) {
  const RunConfig c = parse_config(minimal(R"({ "type": "sine", "c": 2.0 })"));
  ASSERT_EQ(c.warnings.size(), 1u);
  EXPECT_NE(c.warnings[0].find("sine"), std::string::npos);
}

TEST(Config, CustomSamplesLength) {
  EXPECT_NO_THROW(parse_config(minimal(
      R"({ "type": "custom_samples", "values": [1,2,3,4,5,6,7,8,9], "boundary": [0, 0] })")));
  EXPECT_THROW(parse_config(minimal(R"({ "type": "custom_samples", "values": [1,2,3] })")), ConfigError);
  EXPECT_THROW(parse_config(minimal(
                   R"({ "type": "custom_samples", "values": [1,2,3,4,5,6,7,8,9], "boundary": [0] })")),
               ConfigError);
}
