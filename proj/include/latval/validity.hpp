#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latval/capture_model.hpp"
#include "latval/pulse_pipeline.hpp"

namespace latval {

// Four-way run classification. Aggregate external timing claims may use only
// class A; runtime-only software claims may also use class B.
enum class ValidityClass {
  A_valid_runtime_and_sync,
  B_valid_runtime_incomplete_sync,
  C_invalid_runtime,
  D_methodology_failure,
};

const char* code(ValidityClass c);   // "A".."D"
const char* label(ValidityClass c);  // human-readable
ValidityClass validity_from_code(std::string_view code);

struct FailureMode {
  enum class Kind {
    healthy,
    post_marker_collapse,
    partial_transition_loss,
    complete_acquisition_failure,
    marker_overlap,
    gpio_line_misobservation,
    pairing_failure,
  };

  Kind kind = Kind::healthy;
  // Only meaningful for partial_transition_loss.
  std::optional<double> loss_fraction;

  static FailureMode healthy() { return {}; }
  static FailureMode of(Kind k) { return {k, std::nullopt}; }
  static FailureMode partial_loss(double fraction) {
    return {Kind::partial_transition_loss, fraction};
  }

  bool is_healthy() const { return kind == Kind::healthy; }
  friend bool operator==(const FailureMode&, const FailureMode&) = default;
};

const char* to_string(FailureMode::Kind kind);
FailureMode::Kind failure_kind_from_string(std::string_view s);

struct DecouplingReport {
  std::string run_id;
  bool software_complete = false;
  std::size_t software_rows = 0;
  bool marker_found = false;
  std::size_t transitions_recovered = 0;  // raw edges in the stream
  std::size_t transitions_expected = 0;   // 2 x iterations, marker excluded
  std::size_t pairs_formed = 0;
  FailureMode failure_mode;
  ValidityClass validity = ValidityClass::A_valid_runtime_and_sync;

  bool decoupled() const { return software_complete && !failure_mode.is_healthy(); }
};

// Assigns the external-channel failure mode. Rules, first match wins:
//   no edges + operator flag        -> gpio_line_misobservation
//   no edges                        -> complete_acquisition_failure
//   extra markers or a software
//   latency at/above the threshold  -> marker_overlap
//   no marker                       -> pairing_failure
//   no post-marker inference pulse  -> post_marker_collapse
//   fewer pulses than iterations    -> partial_transition_loss
//   more pulses than iterations     -> pairing_failure
//   otherwise                       -> healthy
// validity is filled with the class implied by the report alone (no
// separation check); classify_run_validity refines it.
DecouplingReport detect_decoupling(const SoftwareTimingLog& log, const PairingResult& pairing,
                                   const RunMetadata& meta, std::size_t transitions_recovered);

// Precedence D > C > B > A.
ValidityClass classify_run_validity(const DecouplingReport& report,
                                    const std::optional<MarkerSeparationCheck>& separation);

// Indices into the classified sequence; nothing is dropped.
struct ClaimViews {
  std::vector<std::size_t> external;       // class A
  std::vector<std::size_t> software_only;  // class A or B
  std::vector<std::size_t> excluded;       // class C or D
};

ClaimViews filter_for_external_claims(std::span<const ValidityClass> runs);

}  // namespace latval
