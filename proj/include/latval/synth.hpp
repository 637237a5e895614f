#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "latval/capture_model.hpp"
#include "latval/validity.hpp"

namespace latval::synth {

// ---------------------------------------------------------------------------
// Latency distributions
// ---------------------------------------------------------------------------

inline constexpr double kMinLatencyMs = 0.01;

struct Gaussian {
  double mean_ms = 0.0;
  double sd_ms = 0.0;
};

struct MixtureComponent {
  double weight = 0.0;
  Gaussian dist;
};

struct Mixture {
  std::vector<MixtureComponent> components;
};

// Base draw multiplied by spike_scale with probability spike_prob.
struct Spiked {
  Gaussian base;
  double spike_prob = 0.0;
  double spike_scale = 1.0;
};

using LatencyDistSpec = std::variant<Gaussian, Mixture, Spiked>;

// Throws std::invalid_argument (weights not summing to 1, spike_prob outside
// [0,1), negative sd, ...).
void validate(const LatencyDistSpec& spec);
// Draws one latency, clamped to >= kMinLatencyMs.
double sample(const LatencyDistSpec& spec, std::mt19937_64& rng);
// Mean before clamping.
double nominal_mean(const LatencyDistSpec& spec);
// Shifts every Gaussian mean by delta_ms.
LatencyDistSpec shifted(const LatencyDistSpec& spec, double delta_ms);

// ---------------------------------------------------------------------------
// Faults
// ---------------------------------------------------------------------------

struct NoFault {};
// Stream ends with the marker's falling edge.
struct PostMarkerCollapse {};
// round(drop_fraction * N) measured pulses are removed, both edges, chosen
// uniformly without replacement.
struct PartialLoss {
  double drop_fraction = 0.0;
};
struct EmptyCapture {};
// Marker emitted at this width; the classifier threshold is lowered below it
// when necessary so the marker is still found.
struct MarkerOverlap {
  double marker_width_ms = 0.0;
};
// Uniform GPIO-wrapper overhead in [0, overhead_bound_ms] added to each
// external width.
struct Jitter {
  double overhead_bound_ms = 0.05;
};

using FaultSpec =
    std::variant<NoFault, PostMarkerCollapse, PartialLoss, EmptyCapture, MarkerOverlap, Jitter>;

std::string fault_name(const FaultSpec& fault);

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

struct GenOptions {
  double gap_ms = 1.0;       // idle between consecutive pulses
  double lead_in_ms = 5.0;   // idle before the first edge
  double software_resolution_ms = 1e-6;
  // Overrides the width of the first warmup pulse (start-up transient).
  std::optional<double> first_warmup_ms;
  // When false, warmup runs before the capture window opens and its pulses
  // do not appear in the stream.
  bool capture_warmup = true;
};

struct GroundTruth {
  FailureMode expected_mode;
  ValidityClass expected_class = ValidityClass::A_valid_runtime_and_sync;
  FaultSpec fault;
  std::uint64_t seed = 0;
  std::vector<double> true_latencies_ms;  // software latencies, per iteration
  std::vector<double> warmup_widths_ms;
  std::size_t measured_pulses_emitted = 0;
};

struct GeneratedRun {
  RunMetadata meta;  // as written alongside the data (may differ from input for MarkerOverlap)
  SoftwareTimingLog log;
  TransitionStream stream;
  GroundTruth truth;
};

// Throws std::invalid_argument on inconsistent metadata or distribution.
GeneratedRun gen_run(const LatencyDistSpec& spec, const RunMetadata& meta, const FaultSpec& fault,
                     std::uint64_t seed, const GenOptions& options = {});

struct RunPlan {
  LatencyDistSpec dist;
  RunMetadata meta;
  FaultSpec fault;
  std::uint64_t seed = 0;
  GenOptions options;
};

GeneratedRun generate(const RunPlan& plan);

struct ConditionOptions {
  // Per-run shift of the distribution mean, drawn N(0, sd); models the
  // between-session drift that makes run means differ.
  double run_offset_sd_ms = 0.0;
  GenOptions gen;
};

// Run ids are "<meta.run_id>/001", "/002", ... Seeds are derived from
// master_seed, so the whole condition is reproducible. faults holds either
// one entry (applied to every run) or exactly n_runs entries.
std::vector<RunPlan> plan_condition(const LatencyDistSpec& spec, const RunMetadata& meta_template,
                                    std::size_t n_runs, std::uint64_t master_seed,
                                    const std::vector<FaultSpec>& faults = {NoFault{}},
                                    const ConditionOptions& options = {});

std::vector<GeneratedRun> gen_condition(const LatencyDistSpec& spec,
                                        const RunMetadata& meta_template, std::size_t n_runs,
                                        std::uint64_t master_seed,
                                        const std::vector<FaultSpec>& faults = {NoFault{}},
                                        const ConditionOptions& options = {});

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// ---------------------------------------------------------------------------
// Named scenarios
// ---------------------------------------------------------------------------

struct Scenario {
  std::string name;
  std::string description;
  std::vector<RunPlan> runs;
};

inline constexpr std::uint64_t kDefaultSeed = 20240601;

const std::vector<std::string>& preset_names();
// Throws std::invalid_argument for an unknown name.
Scenario preset(std::string_view name, std::uint64_t seed = kDefaultSeed);

// Metadata templates used by the presets.
RunMetadata gpu_engine_meta(std::string run_id, Condition condition);
RunMetadata cpu_runtime_meta(std::string run_id, Condition condition);

// Distributions used by the presets.
LatencyDistSpec gpu_baseline_dist();
LatencyDistSpec gpu_memstress_dist();
LatencyDistSpec gpu_storage_dist();
LatencyDistSpec cpu_baseline_dist();
LatencyDistSpec cpu_memstress_dist();
LatencyDistSpec cpu_collapsed_dist();

}  // namespace latval::synth
