#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace edgetwin {

/// Virtual simulation time in integer milliseconds, starting at 0.
using VirtualMs = std::int64_t;

/// Unified error type. `code` is a stable machine-readable kebab-case slug.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

enum class Tier { Iot, Edge, Cloud, Hpc };

const char* to_string(Tier tier);
Tier tier_from_string(const std::string& name);

struct NodeSpec {
    std::string id;
    Tier tier = Tier::Edge;
    std::int64_t cpu_m = 0;         // millicores
    std::int64_t mem_mib = 0;       // MiB
    std::int64_t storage_gib = 0;   // GiB
    double power_idle_w = 0.0;
    double power_max_w = 0.0;
    std::map<std::string, std::string> labels;

    /// Zone label, empty when unset.
    std::string zone() const {
        auto it = labels.find("zone");
        return it == labels.end() ? std::string() : it->second;
    }

    bool operator==(const NodeSpec&) const = default;
};

struct LinkSpec {
    std::string a;
    std::string b;
    VirtualMs latency_ms = 0;
    double bandwidth_mbps = 0.0;
    bool up = true;

    bool operator==(const LinkSpec&) const = default;
};

struct JobSpec {
    std::string id;
    VirtualMs arrival_ms = 0;
    std::int64_t cpu_m = 0;
    std::int64_t mem_mib = 0;
    std::int64_t storage_gib = 0;
    VirtualMs duration_ms = 1;      // compute time, node-independent
    double data_size_mb = 0.0;
    std::optional<std::string> data_source;   // node id or zone label
    std::optional<VirtualMs> latency_bound_ms; // relative to data_source
    std::set<Tier> allowed_tiers;   // empty = all
    std::set<std::string> allowed_zones; // empty = all
    int priority = 0;
    bool migratable = true;

    bool operator==(const JobSpec&) const = default;
};

enum class JobPhase { Queued, Transferring, Running, Completed, Failed };

const char* to_string(JobPhase phase);

struct JobState {
    JobSpec spec;
    JobPhase phase = JobPhase::Queued;
    std::optional<std::string> node;
    VirtualMs placed_at = 0;
    VirtualMs transfer_ends = 0;
    VirtualMs remaining_work = 0;   // ms of compute left, kept current
    int restarts = 0;
    bool violation = false;         // latency bound violated by current placement

    bool active() const { return phase == JobPhase::Transferring || phase == JobPhase::Running; }

    bool operator==(const JobState&) const = default;
};

// --- Scenario events -------------------------------------------------------

struct JobArrival {
    JobSpec job;
    bool operator==(const JobArrival&) const = default;
};
struct NodeFail {
    std::string node;
    bool operator==(const NodeFail&) const = default;
};
struct NodeRecover {
    std::string node;
    bool operator==(const NodeRecover&) const = default;
};
struct LinkChange {
    std::string a;
    std::string b;
    VirtualMs latency_ms = 0;
    double bandwidth_mbps = 0.0;
    bool up = true;
    bool operator==(const LinkChange&) const = default;
};
struct MetricUpdate {
    std::string node;
    double background_load = 0.0;
    bool operator==(const MetricUpdate&) const = default;
};

/// Time-tagged update driven into the twin.
struct ScenarioEvent {
    VirtualMs t = 0;
    std::variant<JobArrival, NodeFail, NodeRecover, LinkChange, MetricUpdate> payload;

    const char* kind() const;

    bool operator==(const ScenarioEvent&) const = default;
};

// --- Scheduler decisions ----------------------------------------------------

enum class DecisionKind { Place, Delay, Migrate, NoOp };

const char* to_string(DecisionKind kind);

struct Decision {
    DecisionKind kind = DecisionKind::NoOp;
    std::string job;
    std::string node;   // target for place/migrate

    static Decision place(std::string job, std::string node) {
        return {DecisionKind::Place, std::move(job), std::move(node)};
    }
    static Decision delay(std::string job) { return {DecisionKind::Delay, std::move(job), {}}; }
    static Decision migrate(std::string job, std::string node) {
        return {DecisionKind::Migrate, std::move(job), std::move(node)};
    }
    static Decision no_op() { return {}; }

    bool operator==(const Decision&) const = default;
};

// --- Event log ---------------------------------------------------------------

/// One applied event, decision, or lifecycle transition. Wire projection is
/// {t, actor, action, job, node, outcome}; scenario-event entries additionally
/// carry their payload so a log replay can reconstruct state and KPIs.
struct LogEntry {
    VirtualMs t = 0;
    std::string actor;     // "scenario" | "engine" | "twin" | "ingest" | "scheduler:<name>"
    std::string action;    // event kind, decision kind, or "requeue"/"run_start"/"complete"/"fail"
    std::string job;
    std::string node;
    std::string outcome;   // "applied" | "rejected:<code>" | "ok" | "violation" | ""
    std::optional<ScenarioEvent> event;

    bool operator==(const LogEntry&) const = default;
};

} // namespace edgetwin
