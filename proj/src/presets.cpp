#include <stdexcept>

#include "latval/synth.hpp"

namespace latval::synth {

RunMetadata gpu_engine_meta(std::string run_id, Condition condition) {
  RunMetadata m;
  m.run_id = std::move(run_id);
  m.architecture = Architecture::gpu_engine();
  m.condition = std::move(condition);
  m.marker_width_ms = 200.0;
  m.marker_threshold_ms = 100.0;
  m.iterations_expected = 100;
  m.warmup_iterations = 10;
  return m;
}

RunMetadata cpu_runtime_meta(std::string run_id, Condition condition) {
  RunMetadata m;
  m.run_id = std::move(run_id);
  m.architecture = Architecture::cpu_runtime();
  m.condition = std::move(condition);
  m.marker_width_ms = 1000.0;
  m.marker_threshold_ms = 800.0;
  m.iterations_expected = 100;
  m.warmup_iterations = 10;
  return m;
}

// Tight cluster; P99 of a 100-sample run lands near 1.276 ms.
LatencyDistSpec gpu_baseline_dist() { return Gaussian{1.228, 0.02}; }

// Shifted base with rare 4x spikes: most runs stay tight, a few carry an
// isolated spike that inflates the run SD but not the P99.
LatencyDistSpec gpu_memstress_dist() { return Spiked{Gaussian{1.46, 0.06}, 0.002, 4.0}; }

// Mild tail inflation: P99 pulled toward 2.3 ms by a 5% slow component.
LatencyDistSpec gpu_storage_dist() {
  return Mixture{{{0.95, Gaussian{1.45, 0.05}}, {0.05, Gaussian{2.3, 0.25}}}};
}

// Multimodal CPU path: modes near 80, 150 and 200 ms, run SD around 32 ms.
LatencyDistSpec cpu_baseline_dist() {
  return Mixture{{{0.04, Gaussian{80.0, 5.0}}, {0.46, Gaussian{150.0, 10.0}},
                  {0.50, Gaussian{200.0, 8.0}}}};
}

// Same modal structure, broader (run SD around 40 ms).
LatencyDistSpec cpu_memstress_dist() {
  return Mixture{{{0.10, Gaussian{80.0, 6.0}}, {0.40, Gaussian{150.0, 12.0}},
                  {0.50, Gaussian{205.0, 9.0}}}};
}

// Deterministic slow regime.
LatencyDistSpec cpu_collapsed_dist() { return Gaussian{198.32, 3.5}; }

namespace {

Scenario trt_baseline(std::uint64_t seed) {
  ConditionOptions opts;
  opts.run_offset_sd_ms = 0.015;
  return {"trt_baseline",
          "GPU engine, baseline: 5 runs x 100 iterations, gaussian(1.228, 0.02) ms with "
          "0.015 ms between-run drift; targets mean of run means 1.228 ms, mean P99 ~1.276 ms",
          plan_condition(gpu_baseline_dist(),
                         gpu_engine_meta("trt_baseline", Condition::baseline()), 5, seed,
                         {NoFault{}}, opts)};
}

Scenario trt_memstress(std::uint64_t seed) {
  ConditionOptions opts;
  opts.run_offset_sd_ms = 0.02;
  return {"trt_memstress",
          "GPU engine, light memory pressure: 20 runs x 100 iterations, gaussian(1.46, 0.06) ms "
          "with 4x spikes at p=0.002; targets mean ~1.469 ms, mean P99 ~1.61 ms",
          plan_condition(gpu_memstress_dist(),
                         gpu_engine_meta("trt_memstress", Condition::memory_stress_light()), 20,
                         seed, {NoFault{}}, opts)};
}

Scenario ort_baseline(std::uint64_t seed) {
  ConditionOptions opts;
  opts.run_offset_sd_ms = 5.0;
  return {"ort_baseline",
          "CPU runtime, baseline: 5 runs x 100 iterations, 3-mode mixture (80/150/200 ms); "
          "targets mean of run means ~171 ms, run SDs ~26-38 ms",
          plan_condition(cpu_baseline_dist(),
                         cpu_runtime_meta("ort_baseline", Condition::baseline()), 5, seed,
                         {NoFault{}}, opts)};
}

Scenario ort_memstress_collapse(std::uint64_t seed) {
  ConditionOptions opts;
  opts.run_offset_sd_ms = 5.0;
  const auto meta = cpu_runtime_meta("ort_memstress_collapse", Condition::memory_stress_light());
  auto runs = plan_condition(cpu_memstress_dist(), meta, 4, seed, {NoFault{}}, opts);
  RunPlan collapsed;
  collapsed.dist = cpu_collapsed_dist();
  collapsed.meta = meta;
  collapsed.meta.run_id = meta.run_id + "/005";
  collapsed.fault = NoFault{};
  collapsed.seed = derive_seed(seed, 4);
  runs.push_back(std::move(collapsed));
  return {"ort_memstress_collapse",
          "CPU runtime, light memory pressure: runs 001-004 keep the multimodal structure "
          "(run SD ~34-46 ms); run 005 collapses to gaussian(198.32, 3.5) ms",
          std::move(runs)};
}

Scenario storage_stress_trio(std::uint64_t seed) {
  ConditionOptions opts;
  // The capture window opens at the marker, so warmup pulses are not recorded
  // and transition counts are marker edges plus measured edges only.
  opts.gen.capture_warmup = false;
  const std::vector<FaultSpec> faults{PostMarkerCollapse{}, PartialLoss{0.4}, EmptyCapture{}};
  return {"storage_stress_trio",
          "GPU engine, storage writeback: complete software logs with external capture "
          "degraded three ways (post-marker collapse, 40% transition loss, empty capture)",
          plan_condition(gpu_storage_dist(),
                         gpu_engine_meta("storage_stress_trio", Condition::storage_stress()), 3,
                         seed, faults, opts)};
}

Scenario marker_overlap_demo(std::uint64_t seed) {
  const auto meta = cpu_runtime_meta("marker_overlap_demo", Condition::baseline());
  const auto run_seed = derive_seed(seed, 0);
  RunPlan broken;
  broken.dist = cpu_baseline_dist();
  broken.meta = meta;
  broken.meta.run_id = meta.run_id + "/marker_200ms";
  broken.fault = MarkerOverlap{200.0};
  broken.seed = run_seed;
  RunPlan fixed = broken;
  fixed.meta.run_id = meta.run_id + "/marker_1000ms";
  fixed.fault = NoFault{};
  return {"marker_overlap_demo",
          "CPU runtime, same latencies captured twice: a 200 ms marker overlapping the "
          "80-250 ms inference distribution, and the 1000 ms marker / 800 ms threshold fix",
          {broken, fixed}};
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"trt_baseline",           "trt_memstress",
                                              "ort_baseline",           "ort_memstress_collapse",
                                              "storage_stress_trio",    "marker_overlap_demo"};
  return names;
}

Scenario preset(std::string_view name, std::uint64_t seed) {
  // Salt with the name so presets sharing a seed draw independent latencies.
  std::uint64_t salt = 0xcbf29ce484222325ULL;
  for (char c : name) salt = (salt ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
  seed ^= salt;
  if (name == "trt_baseline") return trt_baseline(seed);
  if (name == "trt_memstress") return trt_memstress(seed);
  if (name == "ort_baseline") return ort_baseline(seed);
  if (name == "ort_memstress_collapse") return ort_memstress_collapse(seed);
  if (name == "storage_stress_trio") return storage_stress_trio(seed);
  if (name == "marker_overlap_demo") return marker_overlap_demo(seed);
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

}  // namespace latval::synth
