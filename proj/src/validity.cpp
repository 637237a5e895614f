#include "latval/validity.hpp"

#include <algorithm>
#include <stdexcept>

namespace latval {

const char* code(ValidityClass c) {
  switch (c) {
    case ValidityClass::A_valid_runtime_and_sync: return "A";
    case ValidityClass::B_valid_runtime_incomplete_sync: return "B";
    case ValidityClass::C_invalid_runtime: return "C";
    case ValidityClass::D_methodology_failure: return "D";
  }
  return "?";
}

const char* label(ValidityClass c) {
  switch (c) {
    case ValidityClass::A_valid_runtime_and_sync: return "valid runtime and valid synchronization";
    case ValidityClass::B_valid_runtime_incomplete_sync:
      return "valid runtime, incomplete synchronization";
    case ValidityClass::C_invalid_runtime: return "invalid runtime";
    case ValidityClass::D_methodology_failure: return "methodology failure";
  }
  return "?";
}

ValidityClass validity_from_code(std::string_view c) {
  if (c == "A") return ValidityClass::A_valid_runtime_and_sync;
  if (c == "B") return ValidityClass::B_valid_runtime_incomplete_sync;
  if (c == "C") return ValidityClass::C_invalid_runtime;
  if (c == "D") return ValidityClass::D_methodology_failure;
  throw std::invalid_argument("unknown validity class '" + std::string(c) + "'");
}

const char* to_string(FailureMode::Kind kind) {
  using K = FailureMode::Kind;
  switch (kind) {
    case K::healthy: return "healthy";
    case K::post_marker_collapse: return "post_marker_collapse";
    case K::partial_transition_loss: return "partial_transition_loss";
    case K::complete_acquisition_failure: return "complete_acquisition_failure";
    case K::marker_overlap: return "marker_overlap";
    case K::gpio_line_misobservation: return "gpio_line_misobservation";
    case K::pairing_failure: return "pairing_failure";
  }
  return "?";
}

FailureMode::Kind failure_kind_from_string(std::string_view s) {
  using K = FailureMode::Kind;
  for (auto k : {K::healthy, K::post_marker_collapse, K::partial_transition_loss,
                 K::complete_acquisition_failure, K::marker_overlap, K::gpio_line_misobservation,
                 K::pairing_failure}) {
    if (s == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown failure mode '" + std::string(s) + "'");
}

namespace {

FailureMode assign_failure_mode(const SoftwareTimingLog& log, const PairingResult& pairing,
                                const RunMetadata& meta, std::size_t transitions_recovered) {
  using K = FailureMode::Kind;
  if (transitions_recovered == 0) {
    return FailureMode::of(meta.gpio_line_misobserved ? K::gpio_line_misobservation
                                                      : K::complete_acquisition_failure);
  }
  const auto rows = log.rows();
  const bool slow_inference_crosses_threshold =
      std::any_of(rows.begin(), rows.end(),
                  [&](const TimingRow& r) { return r.latency_ms >= meta.marker_threshold_ms; });
  if (pairing.extra_markers > 0 || slow_inference_crosses_threshold) {
    return FailureMode::of(K::marker_overlap);
  }
  if (!pairing.marker_found) return FailureMode::of(K::pairing_failure);

  const std::size_t expected = meta.iterations_expected;
  const std::size_t observed = pairing.post_marker_inference;
  if (observed == 0) return FailureMode::of(K::post_marker_collapse);
  if (observed < expected) {
    const double recovered = 2.0 * static_cast<double>(observed);
    return FailureMode::partial_loss(1.0 - recovered / (2.0 * static_cast<double>(expected)));
  }
  if (observed > expected) return FailureMode::of(K::pairing_failure);
  return FailureMode::healthy();
}

}  // namespace

DecouplingReport detect_decoupling(const SoftwareTimingLog& log, const PairingResult& pairing,
                                   const RunMetadata& meta, std::size_t transitions_recovered) {
  if (!log.run_id().empty() && !meta.run_id.empty() && log.run_id() != meta.run_id) {
    throw std::invalid_argument("software log '" + log.run_id() + "' does not belong to run '" +
                                meta.run_id + "'");
  }
  DecouplingReport report;
  report.run_id = meta.run_id;
  report.software_complete = log.complete();
  report.software_rows = log.rows().size();
  report.marker_found = pairing.marker_found;
  report.transitions_recovered = transitions_recovered;
  report.transitions_expected = 2 * meta.iterations_expected;
  report.pairs_formed = pairing.pairs.size();
  report.failure_mode = assign_failure_mode(log, pairing, meta, transitions_recovered);
  report.validity = classify_run_validity(report, std::nullopt);
  return report;
}

ValidityClass classify_run_validity(const DecouplingReport& report,
                                    const std::optional<MarkerSeparationCheck>& separation) {
  using K = FailureMode::Kind;
  const auto kind = report.failure_mode.kind;
  if ((separation && !separation->pass) || kind == K::gpio_line_misobservation ||
      kind == K::marker_overlap) {
    return ValidityClass::D_methodology_failure;
  }
  if (!report.software_complete) return ValidityClass::C_invalid_runtime;
  if (kind != K::healthy) return ValidityClass::B_valid_runtime_incomplete_sync;
  return ValidityClass::A_valid_runtime_and_sync;
}

ClaimViews filter_for_external_claims(std::span<const ValidityClass> runs) {
  ClaimViews views;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    switch (runs[i]) {
      case ValidityClass::A_valid_runtime_and_sync:
        views.external.push_back(i);
        views.software_only.push_back(i);
        break;
      case ValidityClass::B_valid_runtime_incomplete_sync:
        views.software_only.push_back(i);
        break;
      default:
        views.excluded.push_back(i);
        break;
    }
  }
  return views;
}

}  // namespace latval
