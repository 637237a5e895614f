#include "latval/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace latval {

namespace {

double mean_of(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Two-pass sample SD.
double sample_sd(std::span<const double> xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double median_of(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const auto n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

double nearest_rank(std::span<const double> sorted, unsigned percent) {
  if (sorted.empty()) throw std::invalid_argument("percentile of empty sample");
  if (percent == 0 || percent > 100) throw std::invalid_argument("percent must be in (0, 100]");
  const std::size_t n = sorted.size();
  std::size_t rank = (static_cast<std::size_t>(percent) * n + 99) / 100;  // ceil(p*n/100)
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

RunSummary run_summary(std::span<const double> latencies_ms, std::string run_id,
                       std::string condition) {
  if (latencies_ms.empty()) throw std::invalid_argument("cannot summarize an empty run");
  for (double x : latencies_ms) {
    if (!std::isfinite(x) || x <= 0.0)
      throw std::invalid_argument("latencies must be positive and finite");
  }
  std::vector<double> sorted(latencies_ms.begin(), latencies_ms.end());
  std::sort(sorted.begin(), sorted.end());

  RunSummary s;
  s.run_id = std::move(run_id);
  s.condition = std::move(condition);
  s.n = sorted.size();
  // Summing the sorted copy keeps the result independent of input order.
  s.mean = mean_of(sorted);
  s.sd = sample_sd(sorted, s.mean);
  s.min = sorted.front();
  s.p50 = nearest_rank(sorted, 50);
  s.p95 = nearest_rank(sorted, 95);
  s.p99 = nearest_rank(sorted, 99);
  s.max = sorted.back();
  return s;
}

ConditionSummary condition_summary(std::span<const RunSummary> runs) {
  if (runs.empty()) throw std::invalid_argument("condition summary needs at least one run");
  ConditionSummary c;
  c.condition = runs.front().condition;
  std::vector<double> means, p99s;
  for (const auto& r : runs) {
    if (r.condition != c.condition) {
      throw std::invalid_argument("mixed condition labels: '" + c.condition + "' and '" +
                                  r.condition + "'");
    }
    c.samples += r.n;
    means.push_back(r.mean);
    p99s.push_back(r.p99);
    c.max_observed = std::max(c.max_observed, r.max);
  }
  c.runs = runs.size();
  c.mean_of_run_means = mean_of(means);
  c.run_mean_sd = sample_sd(means, c.mean_of_run_means);
  c.mean_p99 = mean_of(p99s);
  c.single_run = runs.size() == 1;
  return c;
}

EcdfCurve ecdf(std::span<const double> latencies_ms) {
  if (latencies_ms.empty()) throw std::invalid_argument("ECDF of empty sample");
  std::vector<double> sorted(latencies_ms.begin(), latencies_ms.end());
  std::sort(sorted.begin(), sorted.end());
  EcdfCurve curve;
  const auto n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    // Ties collapse into one step at the last occurrence.
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    curve.values.push_back(sorted[i]);
    curve.fractions.push_back(static_cast<double>(i + 1) / n);
  }
  return curve;
}

std::string ecdf_csv(const EcdfCurve& curve) {
  std::string out = "value_ms,fraction\n";
  char buf[64];
  for (std::size_t i = 0; i < curve.values.size(); ++i) {
    auto [e1, ec1] = std::to_chars(buf, buf + sizeof buf, curve.values[i]);
    out.append(buf, e1);
    out += ',';
    auto [e2, ec2] = std::to_chars(buf, buf + sizeof buf, curve.fractions[i]);
    out.append(buf, e2);
    out += '\n';
  }
  return out;
}

TailInflation detect_tail_inflation(const ConditionSummary& baseline,
                                    const ConditionSummary& stressed, double p99_ratio_threshold) {
  if (baseline.runs == 0 || stressed.runs == 0)
    throw std::invalid_argument("tail inflation needs non-empty summaries");
  TailInflation t;
  t.threshold = p99_ratio_threshold;
  t.p99_ratio = stressed.mean_p99 / baseline.mean_p99;
  t.mean_ratio = stressed.mean_of_run_means / baseline.mean_of_run_means;
  t.max_ratio = stressed.max_observed / baseline.max_observed;
  t.flagged = t.p99_ratio >= p99_ratio_threshold;
  return t;
}

RegimeShiftFlag detect_regime_shift(std::span<const RunSummary> baseline_runs,
                                    const RunSummary& candidate, double collapse_threshold) {
  if (baseline_runs.size() < 2)
    throw std::invalid_argument("regime shift detection needs at least two baseline runs");
  std::vector<double> sds, means;
  for (const auto& r : baseline_runs) {
    sds.push_back(r.sd);
    means.push_back(r.mean);
  }
  RegimeShiftFlag f;
  f.run_id = candidate.run_id;
  f.run_sd = candidate.sd;
  f.run_mean = candidate.mean;
  f.threshold = collapse_threshold;
  f.baseline_median_run_sd = median_of(sds);
  f.baseline_mean = mean_of(means);
  if (f.baseline_median_run_sd > 0.0) {
    f.sd_collapse_ratio = f.run_sd / f.baseline_median_run_sd;
  } else {
    f.sd_collapse_ratio = f.run_sd > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  }
  f.flagged = f.sd_collapse_ratio <= collapse_threshold && f.run_mean >= f.baseline_mean;
  return f;
}

std::string format_condition_table(std::span<const ConditionSummary> rows) {
  std::size_t name_width = 9;  // "Condition"
  for (const auto& r : rows) name_width = std::max(name_width, r.condition.size());
  std::string out;
  char line[512];
  std::snprintf(line, sizeof line, "%-*s %6s %8s %14s %12s %12s %14s\n",
                static_cast<int>(name_width), "Condition", "Runs", "Samples", "MeanRunMean_ms",
                "RunMeanSD_ms", "MeanP99_ms", "MaxObserved_ms");
  out += line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-*s %6zu %8zu %14.3f %12.3f %12.3f %14.3f\n",
                  static_cast<int>(name_width), r.condition.c_str(), r.runs, r.samples,
                  r.mean_of_run_means, r.run_mean_sd, r.mean_p99, r.max_observed);
    out += line;
  }
  return out;
}

}  // namespace latval
