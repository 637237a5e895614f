#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latval/capture_model.hpp"
#include "latval/pulse_pipeline.hpp"
#include "latval/stats.hpp"
#include "latval/synth.hpp"
#include "latval/validity.hpp"

namespace latval {

// File names inside a run directory.
inline constexpr const char* kSoftwareCsv = "software.csv";
inline constexpr const char* kTransitionsCsv = "transitions.csv";
inline constexpr const char* kMetadataJson = "metadata.json";
inline constexpr const char* kGroundTruthJson = "ground_truth.json";

struct AnalyzeOptions {
  std::optional<double> marker_threshold_ms;  // overrides the metadata value
  double min_margin = kDefaultMinMargin;
};

struct RunReport {
  RunMetadata meta;
  std::size_t edges = 0;
  std::size_t pulses = 0;
  std::size_t orphan_edges = 0;
  PairingResult pairing;
  MarkerSeparationCheck separation;
  DecouplingReport decoupling;
  ValidityClass validity = ValidityClass::A_valid_runtime_and_sync;
  std::optional<RunSummary> software;  // classes A and B
  std::optional<RunSummary> external;  // class A only
  std::vector<double> software_latencies_ms;
  std::vector<double> external_widths_ms;
  std::vector<std::string> warnings;
};

// A/B -> 0, C -> 2, D -> 3. Exit code 1 is reserved for input errors.
int exit_code(ValidityClass c);

RunReport analyze_run(const SoftwareTimingLog& log, const TransitionStream& stream,
                      const RunMetadata& meta, const AnalyzeOptions& options = {});
// Loads metadata.json, software.csv and transitions.csv from dir.
RunReport analyze_run_dir(const std::filesystem::path& dir, const AnalyzeOptions& options = {});

std::string run_report_json(const RunReport& report);
std::string run_report_text(const RunReport& report);

struct ConditionReportOptions {
  AnalyzeOptions analyze;
  double p99_ratio_threshold = kDefaultP99RatioThreshold;
  double sd_collapse_threshold = kDefaultSdCollapseThreshold;
};

struct ConditionReport {
  std::vector<RunReport> runs;
  std::vector<RunReport> baseline_runs;
  ClaimViews views;
  std::optional<ConditionSummary> external;       // class A, external widths
  std::optional<ConditionSummary> software_only;  // classes A and B, software latencies
  std::optional<ConditionSummary> baseline;       // baseline software-only view
  std::optional<TailInflation> tail_inflation;
  std::vector<RegimeShiftFlag> regime_shift;      // one per software-only run
  bool external_claims_defensible = false;
  std::vector<std::string> warnings;
};

// Throws std::invalid_argument when runs is empty or condition labels mix.
ConditionReport build_condition_report(std::vector<RunReport> runs,
                                       std::vector<RunReport> baseline_runs,
                                       const ConditionReportOptions& options = {});
// Analyzes directories concurrently, then assembles the report.
ConditionReport analyze_condition(std::span<const std::filesystem::path> run_dirs,
                                  std::span<const std::filesystem::path> baseline_dirs,
                                  const ConditionReportOptions& options = {});

std::string condition_report_json(const ConditionReport& report);
std::string condition_report_text(const ConditionReport& report);
// Writes condition.json, condition.txt and ECDF CSVs into out_dir.
void write_condition_outputs(const ConditionReport& report, const std::filesystem::path& out_dir);

// Writes the four run files into dir (created if needed).
void write_run_dir(const synth::GeneratedRun& run, const std::filesystem::path& dir);
// Writes scenario.json and one directory per run (named by run id) under
// out_dir; returns the run directories in plan order.
std::vector<std::filesystem::path> write_scenario(const synth::Scenario& scenario,
                                                  const std::filesystem::path& out_dir);
// Reads a scenario description file (see README) into runnable plans.
synth::Scenario load_scenario_file(const std::filesystem::path& path,
                                   std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace latval
