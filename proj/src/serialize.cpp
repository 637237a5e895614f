#include "latval/serialize.hpp"

#include <cmath>
#include <stdexcept>

namespace latval {

using nlohmann::json;

double round6(double ms) { return std::round(ms * 1e6) / 1e6; }

void to_json(json& j, const Pulse& p) {
  j = json{{"start_s", format_seconds(p.start)},
           {"end_s", format_seconds(p.end)},
           {"width_ms", round6(p.width_ms())},
           {"kind", to_string(p.kind)}};
}

void to_json(json& j, const PairingResult& r) {
  json pairs = json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back(json{{"iteration", p.iteration},
                         {"software_ms", round6(p.software_ms)},
                         {"external_ms", round6(p.external_ms)}});
  }
  j = json{{"pairs", std::move(pairs)},
           {"unmatched_software", r.unmatched_software},
           {"unmatched_pulses", r.unmatched_pulses},
           {"marker_found", r.marker_found},
           {"pre_marker_pulses", r.pre_marker_pulses},
           {"post_marker_inference", r.post_marker_inference},
           {"extra_markers", r.extra_markers},
           {"warnings", r.warnings}};
}

namespace {
// JSON has no infinity.
json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }
}  // namespace

void to_json(json& j, const MarkerSeparationCheck& c) {
  j = json{{"marker_width_ms", round6(c.marker_width_ms)},
           {"inference_max_observed_ms", round6(c.inference_max_observed_ms)},
           {"margin_ratio", finite_or_null(c.margin_ratio)},
           {"min_margin", c.min_margin},
           {"pass", c.pass}};
}

void to_json(json& j, ValidityClass c) { j = json{{"code", code(c)}, {"label", label(c)}}; }

void to_json(json& j, const FailureMode& m) {
  j = json{{"kind", to_string(m.kind)}};
  if (m.loss_fraction) j["loss_fraction"] = round6(*m.loss_fraction);
}

void from_json(const json& j, FailureMode& m) {
  m.kind = failure_kind_from_string(j.at("kind").get<std::string>());
  m.loss_fraction.reset();
  if (j.contains("loss_fraction")) m.loss_fraction = j.at("loss_fraction").get<double>();
}

void to_json(json& j, const DecouplingReport& r) {
  j = json{{"run_id", r.run_id},
           {"software_complete", r.software_complete},
           {"software_rows", r.software_rows},
           {"marker_found", r.marker_found},
           {"transitions_recovered", r.transitions_recovered},
           {"transitions_expected", r.transitions_expected},
           {"pairs_formed", r.pairs_formed},
           {"failure_mode", r.failure_mode},
           {"decoupled", r.decoupled()},
           {"validity", r.validity}};
}

void to_json(json& j, const RunSummary& s) {
  j = json{{"run_id", s.run_id}, {"condition", s.condition}, {"n", s.n},
           {"mean", round6(s.mean)}, {"sd", round6(s.sd)},     {"min", round6(s.min)},
           {"p50", round6(s.p50)},   {"p95", round6(s.p95)},   {"p99", round6(s.p99)},
           {"max", round6(s.max)}};
}

void to_json(json& j, const ConditionSummary& s) {
  j = json{{"condition", s.condition},
           {"runs", s.runs},
           {"samples", s.samples},
           {"mean_of_run_means", round6(s.mean_of_run_means)},
           {"run_mean_sd", round6(s.run_mean_sd)},
           {"mean_p99", round6(s.mean_p99)},
           {"max_observed", round6(s.max_observed)},
           {"single_run", s.single_run}};
}

void to_json(json& j, const TailInflation& t) {
  j = json{{"p99_ratio", round6(t.p99_ratio)},
           {"mean_ratio", round6(t.mean_ratio)},
           {"max_ratio", round6(t.max_ratio)},
           {"threshold", t.threshold},
           {"flagged", t.flagged}};
}

void to_json(json& j, const RegimeShiftFlag& f) {
  j = json{{"run_id", f.run_id},
           {"run_sd", round6(f.run_sd)},
           {"baseline_median_run_sd", round6(f.baseline_median_run_sd)},
           {"sd_collapse_ratio", finite_or_null(round6(f.sd_collapse_ratio))},
           {"run_mean", round6(f.run_mean)},
           {"baseline_mean", round6(f.baseline_mean)},
           {"threshold", f.threshold},
           {"flagged", f.flagged}};
}

json metadata_json(const RunMetadata& m) { return json::parse(serialize_run_metadata(m)); }

RunMetadata metadata_from_json(const json& j) { return parse_run_metadata(j.dump()); }

// ---------------------------------------------------------------------------

namespace synth {

namespace {

json gaussian_json(const Gaussian& g) { return json{{"mean_ms", g.mean_ms}, {"sd_ms", g.sd_ms}}; }

Gaussian gaussian_from(const json& j) {
  return Gaussian{j.at("mean_ms").get<double>(), j.at("sd_ms").get<double>()};
}

}  // namespace

void to_json(json& j, const LatencyDistSpec& d) {
  if (const auto* g = std::get_if<Gaussian>(&d)) {
    j = gaussian_json(*g);
    j["type"] = "gaussian";
  } else if (const auto* m = std::get_if<Mixture>(&d)) {
    json comps = json::array();
    for (const auto& c : m->components) {
      auto cj = gaussian_json(c.dist);
      cj["weight"] = c.weight;
      comps.push_back(std::move(cj));
    }
    j = json{{"type", "mixture"}, {"components", std::move(comps)}};
  } else {
    const auto& s = std::get<Spiked>(d);
    j = gaussian_json(s.base);
    j["type"] = "spiked";
    j["spike_prob"] = s.spike_prob;
    j["spike_scale"] = s.spike_scale;
  }
}

void from_json(const json& j, LatencyDistSpec& d) {
  const auto type = j.at("type").get<std::string>();
  if (type == "gaussian") {
    d = gaussian_from(j);
  } else if (type == "mixture") {
    Mixture m;
    for (const auto& c : j.at("components")) {
      m.components.push_back(MixtureComponent{c.at("weight").get<double>(), gaussian_from(c)});
    }
    d = std::move(m);
  } else if (type == "spiked") {
    d = Spiked{gaussian_from(j), j.at("spike_prob").get<double>(),
               j.at("spike_scale").get<double>()};
  } else {
    throw std::invalid_argument("unknown distribution type '" + type + "'");
  }
  validate(d);
}

void to_json(json& j, const FaultSpec& f) {
  j = json{{"type", fault_name(f)}};
  if (const auto* p = std::get_if<PartialLoss>(&f)) j["drop_fraction"] = p->drop_fraction;
  if (const auto* o = std::get_if<MarkerOverlap>(&f)) j["marker_width_ms"] = o->marker_width_ms;
  if (const auto* x = std::get_if<Jitter>(&f)) j["overhead_bound_ms"] = x->overhead_bound_ms;
}

void from_json(const json& j, FaultSpec& f) {
  const auto type = j.at("type").get<std::string>();
  if (type == "none") f = NoFault{};
  else if (type == "post_marker_collapse") f = PostMarkerCollapse{};
  else if (type == "partial_loss") f = PartialLoss{j.at("drop_fraction").get<double>()};
  else if (type == "empty_capture") f = EmptyCapture{};
  else if (type == "marker_overlap") f = MarkerOverlap{j.at("marker_width_ms").get<double>()};
  else if (type == "jitter") f = Jitter{j.value("overhead_bound_ms", Jitter{}.overhead_bound_ms)};
  else throw std::invalid_argument("unknown fault type '" + type + "'");
}

void to_json(json& j, const GroundTruth& t) {
  j = json{{"expected_failure_mode", t.expected_mode},
           {"expected_class", code(t.expected_class)},
           {"fault", t.fault},
           {"seed", t.seed},
           {"measured_pulses_emitted", t.measured_pulses_emitted},
           {"true_latencies_ms", t.true_latencies_ms},
           {"warmup_widths_ms", t.warmup_widths_ms}};
}

}  // namespace synth

}  // namespace latval
