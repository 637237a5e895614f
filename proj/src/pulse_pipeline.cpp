#include "latval/pulse_pipeline.hpp"

#include <algorithm>
#include <stdexcept>

namespace latval {

const char* to_string(PulseKind kind) {
  switch (kind) {
    case PulseKind::marker: return "marker";
    case PulseKind::inference: return "inference";
    case PulseKind::unclassified: break;
  }
  return "unclassified";
}

ExtractedPulses extract_pulses(const TransitionStream& stream) {
  ExtractedPulses out;
  out.edges = stream.size();
  std::optional<Nanos> rise;
  for (const auto& rec : stream.records()) {
    if (rec.level == Level::high) {
      rise = rec.time;
    } else if (rise) {
      out.pulses.push_back(Pulse{*rise, rec.time, PulseKind::unclassified});
      rise.reset();
    } else {
      ++out.leading_orphans;
    }
  }
  if (rise) ++out.trailing_orphans;
  return out;
}

std::vector<Pulse> classify_pulses(std::span<const Pulse> pulses, double threshold_ms) {
  if (!(threshold_ms > 0.0)) throw std::invalid_argument("classifier threshold must be positive");
  std::vector<Pulse> out(pulses.begin(), pulses.end());
  for (auto& p : out) {
    p.kind = p.width_ms() >= threshold_ms ? PulseKind::marker : PulseKind::inference;
  }
  return out;
}

MarkerLocation locate_marker(std::span<const Pulse> classified) {
  MarkerLocation loc;
  for (std::size_t i = 0; i < classified.size(); ++i) {
    if (classified[i].kind != PulseKind::marker) continue;
    if (!loc.index) {
      loc.index = i;
      loc.pre_marker_pulses = i;
    } else {
      ++loc.extra_markers;
    }
  }
  if (loc.extra_markers > 0) {
    loc.warnings.push_back(std::to_string(loc.extra_markers + 1) +
                           " pulses classified as marker; first one used as anchor");
  }
  return loc;
}

MarkerSeparationCheck validate_marker_separation(double marker_width_ms,
                                                 std::span<const double> observed_inference_ms,
                                                 double min_margin) {
  if (!(marker_width_ms > 0.0)) throw std::invalid_argument("marker width must be positive");
  MarkerSeparationCheck check;
  check.marker_width_ms = marker_width_ms;
  check.min_margin = min_margin;
  if (observed_inference_ms.empty()) return check;
  check.inference_max_observed_ms =
      *std::max_element(observed_inference_ms.begin(), observed_inference_ms.end());
  check.margin_ratio = marker_width_ms / check.inference_max_observed_ms;
  check.pass = check.margin_ratio >= min_margin;
  return check;
}

std::vector<double> PairingResult::external_widths() const {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.external_ms);
  return out;
}

PairingResult pair_intervals(const SoftwareTimingLog& log, std::span<const Pulse> classified) {
  PairingResult result;
  const auto rows = log.rows();
  const auto loc = locate_marker(classified);
  result.marker_found = loc.found();
  result.extra_markers = loc.extra_markers;
  result.warnings = loc.warnings;

  if (!loc.found()) {
    for (const auto& r : rows) result.unmatched_software.push_back(r.iteration);
    result.unmatched_pulses.assign(classified.begin(), classified.end());
    if (!classified.empty()) {
      result.warnings.push_back("no marker found; " + std::to_string(classified.size()) +
                                " pulses left unpaired");
    }
    return result;
  }

  result.pre_marker_pulses = loc.pre_marker_pulses;
  std::size_t next_row = 0;
  for (std::size_t i = *loc.index + 1; i < classified.size(); ++i) {
    const auto& pulse = classified[i];
    if (pulse.kind != PulseKind::inference) {
      result.unmatched_pulses.push_back(pulse);
      continue;
    }
    ++result.post_marker_inference;
    if (next_row < rows.size()) {
      const auto& row = rows[next_row++];
      result.pairs.push_back(PairedInterval{row.iteration, row.latency_ms, pulse.width_ms()});
    } else {
      result.unmatched_pulses.push_back(pulse);
    }
  }
  for (; next_row < rows.size(); ++next_row) result.unmatched_software.push_back(rows[next_row].iteration);
  return result;
}

std::vector<double> observed_inference_widths(const SoftwareTimingLog& log,
                                              const PairingResult& pairing) {
  auto out = log.latencies();
  for (const auto& p : pairing.pairs) out.push_back(p.external_ms);
  for (const auto& p : pairing.unmatched_pulses) {
    if (p.kind == PulseKind::inference) out.push_back(p.width_ms());
  }
  return out;
}

}  // namespace latval
