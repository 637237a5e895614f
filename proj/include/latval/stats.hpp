#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace latval {

// Per-run statistics. Percentiles use the nearest-rank rule: the value at
// 1-based position ceil(p * n) of the sorted sample, so every percentile is an
// observed latency. sd uses the n-1 denominator (0 for a single sample).
struct RunSummary {
  std::string run_id;
  std::string condition;
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double p50 = 0.0;
  double p95 = 0.0;
  double p99 = 0.0;
  double max = 0.0;
};

// Nearest-rank percentile of an ascending sample, percent in (0, 100].
// Rank arithmetic is done in integers so that e.g. 95% of 100 is exactly 95.
double nearest_rank(std::span<const double> sorted, unsigned percent);

// Throws std::invalid_argument on an empty sample or a non-positive /
// non-finite latency.
RunSummary run_summary(std::span<const double> latencies_ms, std::string run_id = {},
                       std::string condition = {});

struct ConditionSummary {
  std::string condition;
  std::size_t runs = 0;
  std::size_t samples = 0;
  double mean_of_run_means = 0.0;
  double run_mean_sd = 0.0;  // sample SD of per-run means; 0 when runs == 1
  double mean_p99 = 0.0;
  double max_observed = 0.0;
  bool single_run = false;
};

// Throws std::invalid_argument on an empty input or mixed condition labels.
ConditionSummary condition_summary(std::span<const RunSummary> runs);

struct EcdfCurve {
  std::vector<double> values;     // distinct, ascending
  std::vector<double> fractions;  // P(X <= value), last is 1
};

EcdfCurve ecdf(std::span<const double> latencies_ms);
std::string ecdf_csv(const EcdfCurve& curve);

inline constexpr double kDefaultP99RatioThreshold = 1.10;
inline constexpr double kDefaultSdCollapseThreshold = 0.25;

struct TailInflation {
  double p99_ratio = 0.0;
  double mean_ratio = 0.0;
  double max_ratio = 0.0;
  double threshold = kDefaultP99RatioThreshold;
  bool flagged = false;
};

TailInflation detect_tail_inflation(const ConditionSummary& baseline,
                                    const ConditionSummary& stressed,
                                    double p99_ratio_threshold = kDefaultP99RatioThreshold);

struct RegimeShiftFlag {
  std::string run_id;
  double run_sd = 0.0;
  double baseline_median_run_sd = 0.0;
  double sd_collapse_ratio = 0.0;
  double run_mean = 0.0;
  double baseline_mean = 0.0;
  double threshold = kDefaultSdCollapseThreshold;
  bool flagged = false;
};

// A run whose spread collapsed to a fraction of the baseline's typical spread
// while its mean sits at or above the baseline mean. Needs >= 2 baseline runs.
RegimeShiftFlag detect_regime_shift(std::span<const RunSummary> baseline_runs,
                                    const RunSummary& candidate,
                                    double collapse_threshold = kDefaultSdCollapseThreshold);

// Fixed-width table with one row per condition summary.
std::string format_condition_table(std::span<const ConditionSummary> rows);

}  // namespace latval
