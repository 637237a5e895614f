#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latval/capture_model.hpp"

namespace latval {

enum class PulseKind { unclassified, marker, inference };

const char* to_string(PulseKind kind);

// One rising->falling interval on the observed line.
struct Pulse {
  Nanos start;
  Nanos end;
  PulseKind kind = PulseKind::unclassified;

  double width_ms() const { return (end - start).millis(); }

  friend bool operator==(const Pulse&, const Pulse&) = default;
};

struct ExtractedPulses {
  std::vector<Pulse> pulses;
  std::size_t edges = 0;
  // A falling edge before any rising edge, and a rising edge never closed.
  std::size_t leading_orphans = 0;
  std::size_t trailing_orphans = 0;

  std::size_t orphans() const { return leading_orphans + trailing_orphans; }
};

ExtractedPulses extract_pulses(const TransitionStream& stream);

// width >= threshold is a marker. Throws std::invalid_argument when
// threshold_ms <= 0.
std::vector<Pulse> classify_pulses(std::span<const Pulse> pulses, double threshold_ms);

struct MarkerLocation {
  std::optional<std::size_t> index;  // first marker
  std::size_t pre_marker_pulses = 0;
  std::size_t extra_markers = 0;     // markers after the first
  std::vector<std::string> warnings;

  bool found() const { return index.has_value(); }
};

MarkerLocation locate_marker(std::span<const Pulse> classified);

inline constexpr double kDefaultMinMargin = 4.0;

struct MarkerSeparationCheck {
  double marker_width_ms = 0.0;
  double inference_max_observed_ms = 0.0;
  double margin_ratio = std::numeric_limits<double>::infinity();
  double min_margin = kDefaultMinMargin;
  bool pass = true;
};

// Throws std::invalid_argument when marker_width_ms <= 0.
MarkerSeparationCheck validate_marker_separation(double marker_width_ms,
                                                 std::span<const double> observed_inference_ms,
                                                 double min_margin = kDefaultMinMargin);

struct PairedInterval {
  std::int64_t iteration = 0;
  double software_ms = 0.0;
  double external_ms = 0.0;
};

struct PairingResult {
  std::vector<PairedInterval> pairs;
  std::vector<std::int64_t> unmatched_software;
  std::vector<Pulse> unmatched_pulses;
  bool marker_found = false;
  std::size_t pre_marker_pulses = 0;
  // Inference-classified pulses after the marker, paired or not.
  std::size_t post_marker_inference = 0;
  std::size_t extra_markers = 0;
  std::vector<std::string> warnings;

  std::vector<double> external_widths() const;
};

// Pairs the k-th post-marker inference pulse with the k-th software row.
// Pre-marker pulses are warmup and never paired; extra markers are reported
// as unmatched pulses.
PairingResult pair_intervals(const SoftwareTimingLog& log, std::span<const Pulse> classified);

// The inference distribution as seen by either channel: every software
// latency plus every post-marker inference pulse width.
std::vector<double> observed_inference_widths(const SoftwareTimingLog& log,
                                              const PairingResult& pairing);

}  // namespace latval
