#include "groupsel/experiment.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "groupsel/io.hpp"
#include "test_support.hpp"

namespace groupsel {
namespace {

using testing::relativeError;

MethodSpec spec(Method m, std::size_t L = 10, std::size_t ns = 100, std::size_t ne = 10) {
  MethodSpec s;
  s.method = m;
  s.groupSize = L;
  s.sketchSize = ns;
  s.eliteCount = ne;
  return s;
}

TrialRecord record(std::string method, std::size_t trial, std::vector<double> curve) {
  TrialRecord rec;
  rec.method = std::move(method);
  rec.trialIndex = trial;
  rec.evalsThroughStep.assign(curve.size(), 1);
  rec.secondsThroughStep.assign(curve.size(), 0.5);
  rec.objectiveCurve = std::move(curve);
  return rec;
}

TEST(GenerateCandidates, StandardNormalMoments) {
  const auto u = generateCandidates(100000, 10, StreamKey::of({2024}));
  const auto& d = u.data();
  const double count = static_cast<double>(d.size());
  const double mean = d.sum() / count;
  const double variance = (d.array() - mean).square().sum() / count;
  EXPECT_GE(mean, -0.005);
  EXPECT_LE(mean, 0.005);
  EXPECT_GE(variance, 0.99);
  EXPECT_LE(variance, 1.01);
}

TEST(GenerateCandidates, ShapeAndDeterminism) {
  const auto a = generateCandidates(13, 4, trialMatrixKey(5, 2));
  const auto b = generateCandidates(13, 4, trialMatrixKey(5, 2));
  const auto c = generateCandidates(13, 4, trialMatrixKey(5, 3));
  EXPECT_EQ(a.rows(), 13u);
  EXPECT_EQ(a.cols(), 4u);
  EXPECT_TRUE(a.data() == b.data());
  EXPECT_FALSE(a.data() == c.data());
  EXPECT_THROW(generateCandidates(0, 4, StreamKey{}), std::domain_error);
  EXPECT_THROW(generateCandidates(4, 0, StreamKey{}), std::domain_error);
}

TEST(ExperimentConfig, LargeConfigValidates) {
  ExperimentConfig cfg;
  cfg.n = 10000;
  cfg.r = 10;
  cfg.trials = 500;
  cfg.methods = {spec(Method::Greedy), spec(Method::GroupGreedy),
                 spec(Method::Randomized, 10, 1000),
                 spec(Method::EliteRandomized, 10, 1000, 100)};
  EXPECT_NO_THROW(cfg.validate());
}

TEST(ExperimentConfig, RejectsBadParameters) {
  ExperimentConfig cfg;
  cfg.n = 50;
  cfg.pMax = 10;
  cfg.methods = {spec(Method::EliteRandomized, 10, 20, 21)};
  try {
    cfg.validate();
    FAIL() << "expected invalid_argument";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("ne = 21 must not exceed ns = 20"), std::string::npos);
  }
  cfg.methods = {spec(Method::Randomized, 10, 51)};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.methods = {spec(Method::GroupGreedy, 0)};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.methods = {spec(Method::Greedy)};
  cfg.pMax = 51;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.pMax = 10;
  cfg.trials = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.trials = 1;
  cfg.methods.clear();
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(ParseMethod, NamesRoundTrip) {
  for (auto m : {Method::Greedy, Method::GroupGreedy, Method::Randomized, Method::EliteRandomized}) {
    EXPECT_EQ(parseMethod(methodName(m)), m);
  }
  EXPECT_THROW(parseMethod("lasso"), std::invalid_argument);
}

TEST(RunExperiment, SingleGreedyTrialMatchesDirectCall) {
  ExperimentConfig cfg;
  cfg.n = 20;
  cfg.r = 3;
  cfg.pMax = 5;
  cfg.trials = 1;
  cfg.masterSeed = 11;
  cfg.methods = {spec(Method::Greedy)};
  const auto records = runExperiment(cfg);
  ASSERT_EQ(records.size(), 1u);
  const auto& rec = records[0];
  ASSERT_TRUE(rec.ok());
  EXPECT_EQ(rec.method, "greedy");
  EXPECT_EQ(rec.objectiveCurve.size(), 5u);
  EXPECT_EQ(rec.evalsThroughStep.size(), 5u);
  EXPECT_EQ(rec.secondsThroughStep.size(), 5u);
  EXPECT_EQ(rec.finalSubset.size(), 5u);

  const auto u = generateCandidates(20, 3, trialMatrixKey(11, 0));
  const auto direct = commonGreedy(u, 5, ObjectiveKind::E);
  EXPECT_EQ(rec.objectiveCurve, direct.objectiveCurve);
  EXPECT_EQ(rec.finalSubset, direct.finalSubset);
  EXPECT_EQ(rec.evalCount, direct.evalCount);
  EXPECT_EQ(rec.evalsThroughStep.back(), rec.evalCount);
  // 20 + 19 + 18 + 17 + 16
  EXPECT_EQ(rec.evalCount, 90u);
}

TEST(RunExperiment, RecordsAreOrderedAndPaired) {
  ExperimentConfig cfg;
  cfg.n = 40;
  cfg.r = 4;
  cfg.pMax = 6;
  cfg.trials = 3;
  cfg.methods = {spec(Method::Greedy), spec(Method::GroupGreedy, 3)};
  const auto records = runExperiment(cfg);
  ASSERT_EQ(records.size(), 6u);
  for (std::size_t t = 0; t < 3; ++t) {
    EXPECT_EQ(records[2 * t].trialIndex, t);
    EXPECT_EQ(records[2 * t].method, "greedy");
    EXPECT_EQ(records[2 * t + 1].trialIndex, t);
    EXPECT_EQ(records[2 * t + 1].method, "gg");
    // Same matrix, and GG with L >= 1 keeps the greedy first pick.
    EXPECT_EQ(records[2 * t].objectiveCurve[0], records[2 * t + 1].objectiveCurve[0]);
  }
}

TEST(RunExperiment, ThreadCountDoesNotChangeResults) {
  ExperimentConfig cfg;
  cfg.n = 120;
  cfg.r = 5;
  cfg.pMax = 12;
  cfg.trials = 7;
  cfg.masterSeed = 3;
  cfg.methods = {spec(Method::Greedy), spec(Method::GroupGreedy, 4),
                 spec(Method::Randomized, 4, 30), spec(Method::EliteRandomized, 4, 30, 5)};
  const auto serial = runExperiment(cfg);
  cfg.threads = 4;
  std::size_t callbacks = 0;
  const auto parallel = runExperiment(cfg, [&](std::size_t, std::size_t total) {
    ++callbacks;
    EXPECT_EQ(total, 7u);
  });
  EXPECT_EQ(callbacks, 7u);
  std::ostringstream a;
  std::ostringstream b;
  writeResultsCsv(a, serial, false);
  writeResultsCsv(b, parallel, false);
  EXPECT_EQ(a.str(), b.str());
}

TEST(RunExperiment, FailuresAreRecordedNotThrown) {
  ExperimentConfig cfg;
  cfg.n = 2;
  cfg.r = 1;
  cfg.pMax = 2;
  cfg.trials = 20;
  // A one-element sketch drawn from two rows hits the already selected row
  // half the time at step 2, leaving nothing to extend with.
  cfg.methods = {spec(Method::Greedy), spec(Method::Randomized, 1, 1)};
  const auto records = runExperiment(cfg);
  ASSERT_EQ(records.size(), 40u);
  std::size_t failures = 0;
  for (const auto& rec : records) {
    if (rec.method == "greedy") EXPECT_TRUE(rec.ok());
    if (rec.ok()) continue;
    ++failures;
    EXPECT_NE(rec.error->find("rgg failed on trial " + std::to_string(rec.trialIndex)),
              std::string::npos);
  }
  EXPECT_GT(failures, 0u);
  EXPECT_LT(failures, 20u);
  for (const auto& row : aggregate(records)) {
    EXPECT_EQ(row.samples, row.method == "greedy" ? 20u : 20u - failures);
  }
}

TEST(RunExperiment, FixedInputMatrix) {
  ExperimentConfig cfg;
  cfg.input = testing::seededMatrix(25, 3, 8);
  cfg.n = 999;  // ignored when an input is given
  cfg.pMax = 4;
  cfg.trials = 3;
  cfg.methods = {spec(Method::Greedy)};
  const auto records = runExperiment(cfg);
  for (const auto& rec : records) EXPECT_EQ(rec.objectiveCurve, records[0].objectiveCurve);
}

TEST(Aggregate, SingleRecordIsItself) {
  const auto rows = aggregate({record("x", 0, {1.0, 4.0})});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].k, 2u);
  EXPECT_DOUBLE_EQ(rows[1].mean, 4.0);
  EXPECT_DOUBLE_EQ(rows[1].geometricMean, 4.0);
  EXPECT_DOUBLE_EQ(rows[1].stddev, 0.0);
  EXPECT_DOUBLE_EQ(rows[1].min, 4.0);
  EXPECT_DOUBLE_EQ(rows[1].max, 4.0);
  EXPECT_DOUBLE_EQ(rows[1].meanWallTime, 0.5);
  EXPECT_DOUBLE_EQ(rows[1].meanEvalCount, 1.0);
}

TEST(Aggregate, TwoRecords) {
  const auto rows = aggregate({record("x", 0, {1.0, 3.0}), record("x", 1, {3.0, 5.0})});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_DOUBLE_EQ(rows[0].mean, 2.0);
  EXPECT_DOUBLE_EQ(rows[1].mean, 4.0);
  EXPECT_DOUBLE_EQ(rows[0].stddev, 1.0);
  EXPECT_NEAR(rows[0].geometricMean, std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(rows[1].geometricMean, std::sqrt(15.0), 1e-15);
  EXPECT_DOUBLE_EQ(rows[1].min, 3.0);
  EXPECT_DOUBLE_EQ(rows[1].max, 5.0);
}

TEST(Aggregate, ZeroValueGivesZeroGeometricMean) {
  const auto rows = aggregate({record("x", 0, {0.0}), record("x", 1, {2.0})});
  EXPECT_DOUBLE_EQ(rows[0].geometricMean, 0.0);
  EXPECT_DOUBLE_EQ(rows[0].mean, 1.0);
}

TEST(Aggregate, MethodsKeepFirstAppearanceOrder) {
  const auto rows = aggregate({record("b", 0, {1.0}), record("a", 0, {2.0}), record("b", 1, {3.0})});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].method, "b");
  EXPECT_EQ(rows[0].samples, 2u);
  EXPECT_EQ(rows[1].method, "a");
}

TEST(Aggregate, EmptyIsAnError) {
  EXPECT_THROW(aggregate({}), std::domain_error);
}

// Regression values recorded from this implementation. Regenerate with
// GROUPSEL_UPDATE_GOLDEN=1 after an intentional change to the RNG or the
// selectors.
class Golden : public ::testing::Test {
 protected:
  static std::filesystem::path path(const std::string& name) {
    return std::filesystem::path(GROUPSEL_GOLDEN_DIR) / name;
  }

  static void check(const std::string& name, const nlohmann::json& actual) {
    const char* update = std::getenv("GROUPSEL_UPDATE_GOLDEN");
    if (update && std::string(update) == "1") {
      std::ofstream(path(name)) << actual.dump(2) << '\n';
      GTEST_SKIP() << "rewrote " << path(name);
    }
    std::ifstream in(path(name));
    ASSERT_TRUE(in) << "missing golden file " << path(name);
    const auto expected = nlohmann::json::parse(in);
    ASSERT_EQ(expected.size(), actual.size());
    for (const auto& [key, value] : expected.items()) {
      ASSERT_TRUE(actual.contains(key)) << key;
      if (value.is_number_float()) {
        EXPECT_LT(relativeError(actual[key].get<double>(), value.get<double>()), 1e-12) << key;
      } else {
        EXPECT_EQ(actual[key], value) << key;
      }
    }
  }
};

TEST_F(Golden, RandomizedMeanOverSeeds) {
  const auto u = testing::seededMatrix(200, 5, 42);
  double sum = 0.0;
  std::uint64_t evals = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto report = randomizedGroupGreedy(u, 20, 10, 20, seed, ObjectiveKind::E);
    sum += report.objectiveCurve.back();
    evals += report.evalCount;
  }
  check("rgg_mean_e.json", {{"meanObjective", sum / 100.0}, {"totalEvals", evals}});
}

TEST_F(Golden, SmallExperimentSummary) {
  ExperimentConfig cfg;
  cfg.n = 150;
  cfg.r = 6;
  cfg.pMax = 12;
  cfg.trials = 50;
  cfg.masterSeed = 2;
  cfg.objective = ObjectiveKind::D;
  cfg.methods = {spec(Method::Greedy), spec(Method::GroupGreedy, 5),
                 spec(Method::Randomized, 5, 40), spec(Method::EliteRandomized, 5, 40, 8)};
  nlohmann::json actual;
  for (const auto& row : aggregate(runExperiment(cfg))) {
    if (row.k != cfg.pMax) continue;
    actual[row.method + ".mean"] = row.mean;
    actual[row.method + ".geometricMean"] = row.geometricMean;
    actual[row.method + ".std"] = row.stddev;
    actual[row.method + ".meanEvalCount"] = row.meanEvalCount;
  }
  check("experiment_d_summary.json", actual);
}

}  // namespace
}  // namespace groupsel
