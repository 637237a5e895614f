#include "latval/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "latval/pulse_pipeline.hpp"

namespace latval::synth {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double draw(const Gaussian& g, std::mt19937_64& rng) {
  if (g.sd_ms == 0.0) return g.mean_ms;
  std::normal_distribution<double> nd(g.mean_ms, g.sd_ms);
  return nd(rng);
}

void check_gaussian(const Gaussian& g) {
  if (!std::isfinite(g.mean_ms) || !std::isfinite(g.sd_ms) || g.sd_ms < 0.0)
    throw std::invalid_argument("gaussian needs a finite mean and a non-negative sd");
}

// Independent random streams per purpose, so that e.g. the fault choice never
// perturbs the latency sequence for a given seed.
enum class Stream : std::uint32_t { latency = 1, warmup = 2, overhead = 3, fault = 4 };

std::mt19937_64 stream_rng(std::uint64_t seed, Stream s) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(s)};
  return std::mt19937_64(seq);
}

Nanos to_ticks(double ms, Nanos period) {
  const auto ticks = static_cast<std::int64_t>(std::llround(ms * 1e6 / static_cast<double>(period.count)));
  return Nanos{std::max<std::int64_t>(1, ticks) * period.count};
}

// Divides by the integral reciprocal when there is one, so 1e-6 steps print
// as short decimals.
double round_to(double x, double resolution) {
  const double per_unit = std::round(1.0 / resolution);
  if (std::abs(per_unit * resolution - 1.0) < 1e-9) return std::round(x * per_unit) / per_unit;
  return std::round(x / resolution) * resolution;
}

}  // namespace

// ---------------------------------------------------------------------------

void validate(const LatencyDistSpec& spec) {
  std::visit(overloaded{
                 [](const Gaussian& g) { check_gaussian(g); },
                 [](const Mixture& m) {
                   if (m.components.empty()) throw std::invalid_argument("empty mixture");
                   double total = 0.0;
                   for (const auto& c : m.components) {
                     if (!(c.weight >= 0.0)) throw std::invalid_argument("negative mixture weight");
                     check_gaussian(c.dist);
                     total += c.weight;
                   }
                   if (std::abs(total - 1.0) > 1e-9)
                     throw std::invalid_argument("mixture weights must sum to 1");
                 },
                 [](const Spiked& s) {
                   check_gaussian(s.base);
                   if (!(s.spike_prob >= 0.0 && s.spike_prob < 1.0))
                     throw std::invalid_argument("spike_prob must be in [0, 1)");
                   if (!(s.spike_scale > 0.0)) throw std::invalid_argument("spike_scale must be positive");
                 },
             },
             spec);
}

double sample(const LatencyDistSpec& spec, std::mt19937_64& rng) {
  const double x = std::visit(
      overloaded{
          [&](const Gaussian& g) { return draw(g, rng); },
          [&](const Mixture& m) {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            double pick = u(rng);
            for (const auto& c : m.components) {
              if (pick < c.weight) return draw(c.dist, rng);
              pick -= c.weight;
            }
            return draw(m.components.back().dist, rng);
          },
          [&](const Spiked& s) {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            const bool spike = u(rng) < s.spike_prob;
            const double base = draw(s.base, rng);
            return spike ? base * s.spike_scale : base;
          },
      },
      spec);
  return std::max(x, kMinLatencyMs);
}

double nominal_mean(const LatencyDistSpec& spec) {
  return std::visit(overloaded{
                        [](const Gaussian& g) { return g.mean_ms; },
                        [](const Mixture& m) {
                          double mu = 0.0;
                          for (const auto& c : m.components) mu += c.weight * c.dist.mean_ms;
                          return mu;
                        },
                        [](const Spiked& s) {
                          return s.base.mean_ms * (1.0 - s.spike_prob + s.spike_prob * s.spike_scale);
                        },
                    },
                    spec);
}

LatencyDistSpec shifted(const LatencyDistSpec& spec, double delta_ms) {
  return std::visit(overloaded{
                        [&](Gaussian g) -> LatencyDistSpec {
                          g.mean_ms += delta_ms;
                          return g;
                        },
                        [&](Mixture m) -> LatencyDistSpec {
                          for (auto& c : m.components) c.dist.mean_ms += delta_ms;
                          return m;
                        },
                        [&](Spiked s) -> LatencyDistSpec {
                          s.base.mean_ms += delta_ms;
                          return s;
                        },
                    },
                    spec);
}

std::string fault_name(const FaultSpec& fault) {
  return std::visit(overloaded{
                        [](const NoFault&) { return std::string("none"); },
                        [](const PostMarkerCollapse&) { return std::string("post_marker_collapse"); },
                        [](const PartialLoss&) { return std::string("partial_loss"); },
                        [](const EmptyCapture&) { return std::string("empty_capture"); },
                        [](const MarkerOverlap&) { return std::string("marker_overlap"); },
                        [](const Jitter&) { return std::string("jitter"); },
                    },
                    fault);
}

// ---------------------------------------------------------------------------

GeneratedRun gen_run(const LatencyDistSpec& spec, const RunMetadata& meta_in,
                     const FaultSpec& fault, std::uint64_t seed, const GenOptions& options) {
  validate(spec);
  RunMetadata meta = meta_in;
  if (meta.iterations_expected == 0) throw std::invalid_argument("iterations_expected must be >= 1");
  if (const auto* overlap = std::get_if<MarkerOverlap>(&fault)) {
    if (!(overlap->marker_width_ms > 0.0))
      throw std::invalid_argument("marker_overlap needs a positive marker width");
    meta.marker_width_ms = overlap->marker_width_ms;
    if (meta.marker_threshold_ms >= meta.marker_width_ms)
      meta.marker_threshold_ms = 0.8 * meta.marker_width_ms;
  }
  try {
    meta.validate();
  } catch (const ValueError& e) {
    throw std::invalid_argument(std::string("inconsistent metadata: ") + e.what());
  }
  if (const auto* loss = std::get_if<PartialLoss>(&fault)) {
    if (!(loss->drop_fraction > 0.0 && loss->drop_fraction < 1.0))
      throw std::invalid_argument("drop_fraction must be in (0, 1)");
  }
  if (const auto* jitter = std::get_if<Jitter>(&fault)) {
    if (!(jitter->overhead_bound_ms >= 0.0))
      throw std::invalid_argument("overhead bound must be non-negative");
  }

  const Nanos period = meta.sample_period;
  const std::size_t n = meta.iterations_expected;
  auto latency_rng = stream_rng(seed, Stream::latency);
  auto warmup_rng = stream_rng(seed, Stream::warmup);
  auto overhead_rng = stream_rng(seed, Stream::overhead);
  auto fault_rng = stream_rng(seed, Stream::fault);

  GroundTruth truth;
  truth.fault = fault;
  truth.seed = seed;

  std::vector<TimingRow> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double latency =
        std::max(round_to(sample(spec, latency_rng), options.software_resolution_ms), kMinLatencyMs);
    rows.push_back(TimingRow{static_cast<std::int64_t>(i), latency});
    truth.true_latencies_ms.push_back(latency);
  }
  for (std::size_t i = 0; i < meta.warmup_iterations; ++i) {
    truth.warmup_widths_ms.push_back(sample(spec, warmup_rng));
  }
  if (options.first_warmup_ms && !truth.warmup_widths_ms.empty()) {
    truth.warmup_widths_ms.front() = *options.first_warmup_ms;
  }

  const double overhead_bound =
      std::holds_alternative<Jitter>(fault) ? std::get<Jitter>(fault).overhead_bound_ms : 0.0;
  std::uniform_real_distribution<double> overhead(0.0, overhead_bound);
  std::vector<double> external_ms;
  external_ms.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double extra = overhead_bound > 0.0 ? overhead(overhead_rng) : 0.0;
    external_ms.push_back(rows[i].latency_ms + extra);
  }

  // Which measured pulses reach the capture.
  std::vector<bool> emitted(n, true);
  if (std::holds_alternative<PostMarkerCollapse>(fault)) {
    std::fill(emitted.begin(), emitted.end(), false);
  } else if (const auto* loss = std::get_if<PartialLoss>(&fault)) {
    const auto drop = static_cast<std::size_t>(std::llround(loss->drop_fraction * n));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), fault_rng);
    for (std::size_t k = 0; k < std::min(drop, n); ++k) emitted[idx[k]] = false;
  }

  // Timeline: lead-in, warmup pulses, marker, measured pulses.
  const Nanos gap = to_ticks(options.gap_ms, period);
  Nanos t = to_ticks(options.lead_in_ms, period);
  std::vector<TransitionRecord> records;
  std::vector<double> emitted_widths_ms;  // non-marker pulses as captured
  auto emit = [&](double width_ms, bool keep) {
    const Nanos w = to_ticks(width_ms, period);
    if (keep) {
      records.push_back({t, Level::high});
      records.push_back({t + w, Level::low});
    }
    t = t + w + gap;
    return w;
  };
  for (double w : truth.warmup_widths_ms) {
    const Nanos q = emit(w, options.capture_warmup);
    if (options.capture_warmup) emitted_widths_ms.push_back(q.millis());
  }
  emit(meta.marker_width_ms, true);
  for (std::size_t i = 0; i < n; ++i) {
    const Nanos q = emit(external_ms[i], emitted[i]);
    if (emitted[i]) {
      emitted_widths_ms.push_back(q.millis());
      ++truth.measured_pulses_emitted;
    }
  }
  if (std::holds_alternative<EmptyCapture>(fault)) records.clear();

  // Expected outcome from the generator's own knowledge of what it emitted.
  using K = FailureMode::Kind;
  const double thr = meta.marker_threshold_ms;
  const bool overlap =
      std::any_of(rows.begin(), rows.end(), [&](const TimingRow& r) { return r.latency_ms >= thr; }) ||
      std::any_of(emitted_widths_ms.begin(), emitted_widths_ms.end(),
                  [&](double w) { return w >= thr; });
  if (records.empty()) {
    truth.expected_mode = FailureMode::of(meta.gpio_line_misobserved ? K::gpio_line_misobservation
                                                                     : K::complete_acquisition_failure);
  } else if (overlap) {
    truth.expected_mode = FailureMode::of(K::marker_overlap);
  } else if (truth.measured_pulses_emitted == 0) {
    truth.expected_mode = FailureMode::of(K::post_marker_collapse);
  } else if (truth.measured_pulses_emitted < n) {
    truth.expected_mode = FailureMode::partial_loss(
        1.0 - static_cast<double>(truth.measured_pulses_emitted) / static_cast<double>(n));
  } else {
    truth.expected_mode = FailureMode::healthy();
  }

  double widest = 0.0;
  for (const auto& r : rows) widest = std::max(widest, r.latency_ms);
  for (std::size_t i = 0; i < n; ++i) {
    if (emitted[i] && !records.empty()) widest = std::max(widest, to_ticks(external_ms[i], period).millis());
  }
  const bool separated = meta.marker_width_ms / widest >= kDefaultMinMargin;
  const auto mode = truth.expected_mode.kind;
  if (!separated || mode == K::marker_overlap || mode == K::gpio_line_misobservation) {
    truth.expected_class = ValidityClass::D_methodology_failure;
  } else if (mode == K::healthy) {
    truth.expected_class = ValidityClass::A_valid_runtime_and_sync;
  } else {
    truth.expected_class = ValidityClass::B_valid_runtime_incomplete_sync;
  }

  GeneratedRun run{meta, SoftwareTimingLog(meta.run_id, n, std::move(rows)),
                   TransitionStream(std::move(records), period), std::move(truth)};
  return run;
}

GeneratedRun generate(const RunPlan& plan) {
  return gen_run(plan.dist, plan.meta, plan.fault, plan.seed, plan.options);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 finalizer
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<RunPlan> plan_condition(const LatencyDistSpec& spec, const RunMetadata& meta_template,
                                    std::size_t n_runs, std::uint64_t master_seed,
                                    const std::vector<FaultSpec>& faults,
                                    const ConditionOptions& options) {
  if (n_runs == 0) throw std::invalid_argument("n_runs must be >= 1");
  if (faults.size() != 1 && faults.size() != n_runs)
    throw std::invalid_argument("faults must have one entry or one per run");
  validate(spec);
  std::mt19937_64 offset_rng(derive_seed(master_seed, 0xfffff));
  std::normal_distribution<double> offset(0.0, 1.0);
  std::vector<RunPlan> plans;
  for (std::size_t i = 0; i < n_runs; ++i) {
    RunPlan plan;
    const double delta = options.run_offset_sd_ms * offset(offset_rng);
    plan.dist = options.run_offset_sd_ms > 0.0 ? shifted(spec, delta) : spec;
    plan.meta = meta_template;
    char suffix[32];
    std::snprintf(suffix, sizeof suffix, "/%03zu", i + 1);
    plan.meta.run_id = meta_template.run_id + suffix;
    plan.fault = faults.size() == 1 ? faults.front() : faults[i];
    plan.seed = derive_seed(master_seed, i);
    plan.options = options.gen;
    plans.push_back(std::move(plan));
  }
  return plans;
}

std::vector<GeneratedRun> gen_condition(const LatencyDistSpec& spec,
                                        const RunMetadata& meta_template, std::size_t n_runs,
                                        std::uint64_t master_seed,
                                        const std::vector<FaultSpec>& faults,
                                        const ConditionOptions& options) {
  std::vector<GeneratedRun> runs;
  for (const auto& plan : plan_condition(spec, meta_template, n_runs, master_seed, faults, options))
    runs.push_back(generate(plan));
  return runs;
}

}  // namespace latval::synth
