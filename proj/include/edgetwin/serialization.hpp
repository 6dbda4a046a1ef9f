#pragma once

#include "edgetwin/types.hpp"
#include "edgetwin/twin.hpp"

#include <json.hpp>

#include <string>

namespace edgetwin {

using Json = nlohmann::ordered_json;

// Scenario document payloads. `strict` walks reject unknown fields.
Json node_to_json(const NodeSpec& spec);
NodeSpec node_from_json(const Json& j, const std::string& path);
Json link_to_json(const LinkSpec& link);
LinkSpec link_from_json(const Json& j, const std::string& path);

/// Job payload as it appears inside a job_arrival event (no arrival field;
/// arrival is the event time).
Json job_to_json(const JobSpec& spec);
JobSpec job_from_json(const Json& j, const std::string& path);

Json event_to_json(const ScenarioEvent& event);
ScenarioEvent event_from_json(const Json& j, const std::string& path);

/// One ingest/persistence line: a scenario event or {"kind":"heartbeat","t":..}.
std::string event_to_line(const ScenarioEvent& event);

Json decision_to_json(const Decision& decision);
Decision decision_from_json(const Json& j);

/// Wire projection {t, actor, action, job, node, outcome} of a log entry.
Json log_entry_to_json(const LogEntry& entry);

/// Canonical twin serialization: clock, nodes, links, jobs, terminal counters.
/// The event log is carried separately (decision log / persistence).
Json twin_to_json(const TwinState& state);
TwinState twin_from_json(const Json& j);

// Strict-walk helpers shared by the scenario parser.
void require_keys(const Json& j, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional, const std::string& path);
std::int64_t get_int(const Json& j, const char* key, const std::string& path);
double get_number(const Json& j, const char* key, const std::string& path);
std::string get_string(const Json& j, const char* key, const std::string& path);
bool get_bool(const Json& j, const char* key, const std::string& path);

} // namespace edgetwin
