#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "latval/stats.hpp"
#include "oracles.hpp"

using namespace latval;

namespace {

std::vector<double> one_to(int n) {
  std::vector<double> v(n);
  std::iota(v.begin(), v.end(), 1.0);
  return v;
}

RunSummary summary_with(std::string id, double mean, double sd, double p99 = 0) {
  RunSummary s;
  s.run_id = std::move(id);
  s.condition = "c";
  s.n = 100;
  s.mean = mean;
  s.sd = sd;
  s.p99 = p99 > 0 ? p99 : mean;
  s.max = s.p99;
  return s;
}

}  // namespace

TEST(RunSummary, OneToHundred) {
  const auto s = run_summary(one_to(100));
  EXPECT_EQ(s.p50, 50.0);
  EXPECT_EQ(s.p95, 95.0);
  EXPECT_EQ(s.p99, 99.0);
  EXPECT_EQ(s.max, 100.0);
  EXPECT_EQ(s.min, 1.0);
  EXPECT_DOUBLE_EQ(s.mean, 50.5);
}

TEST(RunSummary, TwoSamples) {
  const auto s = run_summary(std::vector<double>{1.0, 2.0});
  EXPECT_DOUBLE_EQ(s.mean, 1.5);
  EXPECT_NEAR(s.sd, 0.70710678118654757, 1e-15);
  EXPECT_EQ(s.p50, 1.0);
  EXPECT_EQ(s.p99, 2.0);
}

TEST(RunSummary, SingleSampleHasZeroSd) {
  const auto s = run_summary(std::vector<double>{3.5});
  EXPECT_EQ(s.sd, 0.0);
  EXPECT_EQ(s.p50, 3.5);
  EXPECT_EQ(s.p99, 3.5);
}

TEST(RunSummary, RejectsBadInput) {
  EXPECT_THROW(run_summary(std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW(run_summary(std::vector<double>{1.0, -1.0}), std::invalid_argument);
  EXPECT_THROW(run_summary(std::vector<double>{1.0, NAN}), std::invalid_argument);
}

TEST(RunSummary, MatchesBruteForceOracle) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> len(1, 500);
  std::lognormal_distribution<double> lat(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> xs(len(rng));
    for (auto& x : xs) x = lat(rng);
    if (trial % 7 == 0) {
      for (std::size_t i = 1; i < xs.size(); i += 3) xs[i] = xs[i - 1];  // ties
    }
    const auto s = run_summary(xs);
    ASSERT_EQ(s.n, xs.size());
    ASSERT_EQ(s.p50, oracle::nearest_rank(xs, 50));
    ASSERT_EQ(s.p95, oracle::nearest_rank(xs, 95));
    ASSERT_EQ(s.p99, oracle::nearest_rank(xs, 99));
    ASSERT_EQ(s.max, oracle::max(xs));
    const double m = static_cast<double>(oracle::mean(xs));
    ASSERT_LE(std::abs(s.mean - m), 1e-12 * std::abs(m));
    const double sd = static_cast<double>(oracle::sample_sd(xs));
    if (sd == 0) {
      ASSERT_LE(s.sd, 1e-12 * m);
    } else {
      ASSERT_LE(std::abs(s.sd - sd), 1e-12 * sd);
    }
  }
}

TEST(RunSummary, PermutationInvariant) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> lat(200.0, 30.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> xs(1 + rng() % 300);
    for (auto& x : xs) x = std::abs(lat(rng)) + 0.01;
    const auto a = run_summary(xs);
    std::shuffle(xs.begin(), xs.end(), rng);
    const auto b = run_summary(xs);
    ASSERT_EQ(a.mean, b.mean);
    ASSERT_EQ(a.sd, b.sd);
    ASSERT_EQ(a.p99, b.p99);
  }
}

TEST(RunSummary, ScaleEquivariant) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> lat(0.5, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> xs(1 + rng() % 300);
    for (auto& x : xs) x = lat(rng);
    std::vector<double> ys(xs);
    for (auto& y : ys) y *= 4.0;  // power of two: exact
    const auto a = run_summary(xs);
    const auto b = run_summary(ys);
    ASSERT_EQ(b.p50, 4.0 * a.p50);
    ASSERT_EQ(b.p99, 4.0 * a.p99);
    ASSERT_NEAR(b.mean, 4.0 * a.mean, 1e-12 * b.mean);
    ASSERT_NEAR(b.sd, 4.0 * a.sd, 1e-12 * b.mean);
  }
}

TEST(Ecdf, MatchesRankOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> xs(1 + rng() % 200);
    for (auto& x : xs) x = 1.0 + static_cast<double>(rng() % 50) / 10.0;  // many ties
    const auto c = ecdf(xs);
    ASSERT_EQ(c.values.size(), c.fractions.size());
    ASSERT_EQ(c.fractions.back(), 1.0);
    for (std::size_t i = 0; i < c.values.size(); ++i) {
      if (i > 0) {
        ASSERT_LT(c.values[i - 1], c.values[i]);
        ASSERT_LT(c.fractions[i - 1], c.fractions[i]);
      }
      ASSERT_DOUBLE_EQ(c.fractions[i], oracle::cdf_at(xs, c.values[i]));
    }
  }
}

TEST(Ecdf, Csv) {
  const auto c = ecdf(std::vector<double>{2.0, 1.0, 2.0, 4.0});
  EXPECT_EQ(ecdf_csv(c), "value_ms,fraction\n1,0.25\n2,0.75\n4,1\n");
}

TEST(ConditionSummary, Aggregates) {
  std::vector<RunSummary> runs{summary_with("a", 1.0, 0.1, 1.2), summary_with("b", 2.0, 0.1, 2.4)};
  runs[1].max = 3.0;
  const auto c = condition_summary(runs);
  EXPECT_EQ(c.runs, 2u);
  EXPECT_EQ(c.samples, 200u);
  EXPECT_DOUBLE_EQ(c.mean_of_run_means, 1.5);
  EXPECT_NEAR(c.run_mean_sd, 0.70710678118654757, 1e-15);
  EXPECT_DOUBLE_EQ(c.mean_p99, 1.8);
  EXPECT_EQ(c.max_observed, 3.0);
  EXPECT_FALSE(c.single_run);
}

TEST(ConditionSummary, SingleRunAndErrors) {
  std::vector<RunSummary> one{summary_with("a", 1.0, 0.1)};
  const auto c = condition_summary(one);
  EXPECT_TRUE(c.single_run);
  EXPECT_EQ(c.run_mean_sd, 0.0);
  EXPECT_THROW(condition_summary(std::vector<RunSummary>{}), std::invalid_argument);
  std::vector<RunSummary> mixed{summary_with("a", 1.0, 0.1), summary_with("b", 1.0, 0.1)};
  mixed[1].condition = "other";
  EXPECT_THROW(condition_summary(mixed), std::invalid_argument);
}

TEST(TailInflation, FlagsTwentySixPercent) {
  ConditionSummary base, stress;
  base.runs = stress.runs = 5;
  base.mean_p99 = 1.276;
  base.mean_of_run_means = 1.228;
  base.max_observed = 1.3;
  stress.mean_p99 = 1.613;
  stress.mean_of_run_means = 1.47;
  stress.max_observed = 6.0;
  const auto t = detect_tail_inflation(base, stress);
  EXPECT_TRUE(t.flagged);
  EXPECT_NEAR(t.p99_ratio, 1.264, 0.001);
  EXPECT_FALSE(detect_tail_inflation(base, base).flagged);
  EXPECT_FALSE(detect_tail_inflation(base, stress, 1.3).flagged);
}

TEST(TailInflation, SmallShiftNotFlagged) {
  ConditionSummary base, stress;
  base.runs = stress.runs = 5;
  base.mean_p99 = 209.251;
  stress.mean_p99 = 219.504;
  base.mean_of_run_means = stress.mean_of_run_means = 170.0;
  base.max_observed = stress.max_observed = 230.0;
  const auto t = detect_tail_inflation(base, stress);
  EXPECT_NEAR(t.p99_ratio, 1.049, 0.001);
  EXPECT_FALSE(t.flagged);
}

TEST(RegimeShift, CollapsedSlowRunIsFlagged) {
  std::vector<RunSummary> base{summary_with("b1", 173.0, 28.0), summary_with("b2", 171.0, 30.0),
                               summary_with("b3", 175.0, 29.0)};
  const auto collapsed = detect_regime_shift(base, summary_with("x", 198.32, 3.5));
  EXPECT_TRUE(collapsed.flagged);
  EXPECT_NEAR(collapsed.sd_collapse_ratio, 3.5 / 29.0, 1e-12);
  EXPECT_DOUBLE_EQ(collapsed.baseline_median_run_sd, 29.0);
  EXPECT_DOUBLE_EQ(collapsed.baseline_mean, 173.0);

  EXPECT_FALSE(detect_regime_shift(base, summary_with("y", 170.0, 29.0)).flagged);
  // Tight but fast: not a slow-mode collapse.
  EXPECT_FALSE(detect_regime_shift(base, summary_with("z", 120.0, 3.5)).flagged);
}

TEST(RegimeShift, BaselineRunsAgainstThemselvesNotFlagged) {
  std::vector<RunSummary> base{summary_with("b1", 173.0, 28.0), summary_with("b2", 171.0, 30.0),
                               summary_with("b3", 175.0, 29.0)};
  for (const auto& b : base) EXPECT_FALSE(detect_regime_shift(base, b).flagged);
}

TEST(RegimeShift, NeedsTwoBaselineRuns) {
  std::vector<RunSummary> one{summary_with("b1", 173.0, 28.0)};
  EXPECT_THROW(detect_regime_shift(one, summary_with("x", 198.0, 3.5)), std::invalid_argument);
}

TEST(RegimeShift, ZeroBaselineSpread) {
  std::vector<RunSummary> base{summary_with("b1", 1.0, 0.0), summary_with("b2", 1.0, 0.0)};
  EXPECT_EQ(detect_regime_shift(base, summary_with("x", 1.0, 0.0)).sd_collapse_ratio, 1.0);
  EXPECT_TRUE(std::isinf(detect_regime_shift(base, summary_with("x", 1.0, 0.5)).sd_collapse_ratio));
}

TEST(ConditionTable, Layout) {
  ConditionSummary c;
  c.condition = "baseline";
  c.runs = 5;
  c.samples = 500;
  c.mean_of_run_means = 1.2281;
  c.run_mean_sd = 0.0154;
  c.mean_p99 = 1.276;
  c.max_observed = 1.301;
  const std::vector<ConditionSummary> rows{c};
  const auto t = format_condition_table(rows);
  EXPECT_NE(t.find("Condition"), std::string::npos);
  EXPECT_NE(t.find("MeanRunMean_ms"), std::string::npos);
  EXPECT_NE(t.find("1.228"), std::string::npos);
  EXPECT_NE(t.find("500"), std::string::npos);
}
