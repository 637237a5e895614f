#pragma once

// nlohmann::json conversions for report and scenario types. Widths and
// latencies in reports are rounded to 6 decimals (1 ns in ms).

#include <json.hpp>

#include "latval/pulse_pipeline.hpp"
#include "latval/stats.hpp"
#include "latval/synth.hpp"
#include "latval/validity.hpp"

namespace latval {

double round6(double ms);

void to_json(nlohmann::json& j, const Pulse& p);
void to_json(nlohmann::json& j, const PairingResult& r);
void to_json(nlohmann::json& j, const MarkerSeparationCheck& c);
void to_json(nlohmann::json& j, ValidityClass c);
void to_json(nlohmann::json& j, const FailureMode& m);
void from_json(const nlohmann::json& j, FailureMode& m);
void to_json(nlohmann::json& j, const DecouplingReport& r);
void to_json(nlohmann::json& j, const RunSummary& s);
void to_json(nlohmann::json& j, const ConditionSummary& s);
void to_json(nlohmann::json& j, const TailInflation& t);
void to_json(nlohmann::json& j, const RegimeShiftFlag& f);

nlohmann::json metadata_json(const RunMetadata& m);
RunMetadata metadata_from_json(const nlohmann::json& j);

namespace synth {

void to_json(nlohmann::json& j, const LatencyDistSpec& d);
void from_json(const nlohmann::json& j, LatencyDistSpec& d);
void to_json(nlohmann::json& j, const FaultSpec& f);
void from_json(const nlohmann::json& j, FaultSpec& f);
void to_json(nlohmann::json& j, const GroundTruth& t);

}  // namespace synth

}  // namespace latval
