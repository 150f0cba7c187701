#pragma once

// JSON documents for configs, results and analysis outputs. The schemas are
// described in docs/schemas.md. Non-finite numbers are written as null and
// read back as NaN.

#include <string>

#include "json.hpp"
#include "vstkit/consistency.hpp"
#include "vstkit/observer.hpp"
#include "vstkit/spectrum.hpp"
#include "vstkit/staircase.hpp"

namespace vstkit {

using Json = nlohmann::json;

Json to_json(const StaircaseConfig& c);
// Missing keys keep their defaults. Unknown keys and wrong types are
// reported together as a ConfigError.
StaircaseConfig config_from_json(const Json& j, StaircaseConfig base = {});

Json to_json(const StimulusCommand& s);
Json to_json(const TrialRecord& t);
TrialRecord trial_from_json(const Json& j);

inline constexpr const char* kResultSchema = "vstkit.session_result/1";
Json to_json(const SessionResult& r, const std::string& session_id = {});
SessionResult result_from_json(const Json& j);

Json to_json(const BatchStats& b);
Json to_json(const SpectrumResult& s, bool include_bins = true);
Json to_json(const ConsistencyReport& r);
Json to_json(const ComparisonSummary& s);

// Number or null -> double (NaN for null).
double number_or_nan(const Json& j);

}  // namespace vstkit
