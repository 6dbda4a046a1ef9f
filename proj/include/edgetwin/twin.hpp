#pragma once

#include "edgetwin/types.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace edgetwin {

/// Runtime state of one node: static spec plus liveness, reported background
/// load, and current allocations of transferring/running jobs.
struct NodeState {
    NodeSpec spec;
    bool up = true;
    double background_load = 0.0;
    std::int64_t cpu_used = 0;
    std::int64_t mem_used = 0;
    std::int64_t storage_used = 0;

    std::int64_t free_cpu() const { return spec.cpu_m - cpu_used; }
    std::int64_t free_mem() const { return spec.mem_mib - mem_used; }
    std::int64_t free_storage() const { return spec.storage_gib - storage_used; }

    bool operator==(const NodeState&) const = default;
};

/// Linear idle/max power model. `utilization` must be in [0, 1].
double node_power(const NodeSpec& spec, double utilization);

/// Power drawn right now: max resource fraction plus background load,
/// clamped to [0, 1]; down nodes draw 0 W.
double node_power(const NodeState& node);

/// max(cpu, mem, storage fraction) + background_load, clamped to [0, 1].
/// Zero-capacity resources count as fraction 0.
double node_utilization(const NodeState& node);

using LinkKey = std::pair<std::string, std::string>; // normalized a < b

inline LinkKey link_key(const std::string& a, const std::string& b) {
    return a < b ? LinkKey{a, b} : LinkKey{b, a};
}

class TwinState;

/// Min-latency routing over up links between up nodes. Ties between equal-cost
/// paths are broken by the lexicographic node-id sequence, which also pins the
/// bottleneck bandwidth used for transfers. Built from a state snapshot; not
/// updated when the state changes.
class Routing {
public:
    explicit Routing(const TwinState& state);

    /// Minimum latency sum, 0 for a == b, nullopt when disconnected.
    std::optional<VirtualMs> latency(const std::string& a, const std::string& b) const;

    /// Bottleneck bandwidth (Mbps) along the chosen min-latency path.
    /// nullopt when disconnected; no value restriction for a == b (local).
    std::optional<double> bottleneck(const std::string& a, const std::string& b) const;

    /// Node-id sequence of the chosen path, including both endpoints.
    std::vector<std::string> path(const std::string& a, const std::string& b) const;

private:
    struct Reach {
        VirtualMs dist = 0;
        double bottleneck = 0.0;
        std::vector<std::string> seq;
    };
    const std::map<std::string, Reach>& from(const std::string& source) const;

    std::vector<std::string> node_ids_;
    std::map<std::string, std::vector<std::pair<std::string, const LinkSpec*>>> adjacency_;
    mutable std::map<std::string, std::map<std::string, Reach>> cache_;
    const TwinState* state_;
};

/// Full virtual-time snapshot of topology, allocations, queue, and active
/// jobs: the scheduler's entire world view. Value type; copies are immutable
/// snapshots safe to hand to any thread.
class TwinState {
public:
    TwinState() = default;
    TwinState(std::vector<NodeSpec> nodes, std::vector<LinkSpec> links);

    VirtualMs clock() const { return clock_; }
    const std::map<std::string, NodeState>& nodes() const { return nodes_; }
    const std::map<LinkKey, LinkSpec>& links() const { return links_; }
    const std::map<std::string, JobState>& jobs() const { return jobs_; }
    const std::vector<LogEntry>& log() const { return log_; }
    std::int64_t arrivals() const { return arrivals_; }
    std::int64_t completed() const { return completed_; }
    std::int64_t failed() const { return failed_; }

    const NodeState& node(const std::string& id) const;
    const JobState& job(const std::string& id) const;
    bool has_node(const std::string& id) const { return nodes_.count(id) > 0; }
    bool has_job(const std::string& id) const { return jobs_.count(id) > 0; }

    /// Initial topology, for KPI computation over the log.
    std::vector<NodeSpec> node_specs() const;

    // -- time ----------------------------------------------------------------

    /// Advance the clock, firing internal lifecycle transitions (transfer end,
    /// compute completion) in (time, job id) order along the way. Transitions
    /// falling exactly on `t` fire only when `fire_boundary` is set; the engine
    /// defers them until same-time scenario events have been applied.
    void advance_to(VirtualMs t, bool fire_boundary = true);

    /// Fire transitions due exactly now (used by the engine's tie-break order).
    void fire_due_transitions();

    /// Earliest pending internal transition, if any job is active.
    std::optional<VirtualMs> next_transition() const;

    // -- operations ------------------------------------------------------------

    /// Apply a time-tagged update. Advances the clock to event.t first.
    /// Throws Error: "ordering" on time regression, "unknown-node" /
    /// "unknown-link" / "duplicate-job" / "invalid-value" on bad payloads.
    void apply_event(const ScenarioEvent& event, const std::string& actor = "scenario");

    /// Reject reason for placing `job` on `node`, or nullopt when feasible.
    /// Codes: not-queued, unknown-job, unknown-node, node-down, constraint,
    /// capacity-exceeded, unreachable.
    std::optional<std::string> check_place(const std::string& job_id,
                                           const std::string& node_id,
                                           const Routing& routing) const;

    /// Place a queued job. Throws Error with the check_place code on failure.
    void place_job(const std::string& job_id, const std::string& node_id,
                   const std::string& actor = "twin");

    /// Reject reason for migrating a running job, or nullopt when valid.
    std::optional<std::string> check_migrate(const std::string& job_id,
                                             const std::string& node_id,
                                             const Routing& routing) const;

    /// Move a running migratable job: allocation shifts to the target and the
    /// job re-enters transferring for transfer_time(old, new, data_size) with
    /// remaining_work preserved.
    void migrate_job(const std::string& job_id, const std::string& node_id,
                     const std::string& actor = "twin");

    /// Release an active job as completed or failed, freeing its allocation.
    void release_job(const std::string& job_id, JobPhase outcome,
                     const std::string& actor = "twin");

    // -- queries ----------------------------------------------------------------

    /// Min latency over up links; 0 when a == b; nullopt when disconnected.
    std::optional<VirtualMs> path_latency(const std::string& a, const std::string& b) const;

    /// path_latency + ceil(mb * 8 * 1000 / bottleneck Mbps); 0 when a == b
    /// (local data needs no network hop).
    std::optional<VirtualMs> transfer_time(const std::string& a, const std::string& b,
                                           double size_mb) const;

    /// Resolve a data source (node id or zone label) to the serving node for a
    /// placement on `node_id`: the reachable up node with that id or zone
    /// minimizing path latency, ties to lowest id.
    std::optional<std::string> resolve_data_source(const std::string& source,
                                                   const std::string& node_id,
                                                   const Routing& routing) const;

    /// Immutable value copy.
    TwinState snapshot() const { return *this; }

    /// Copy for scheduler consumption: world view without the event log.
    TwinState scheduler_view() const;

    /// Capacity invariant: on every up node the demands of transferring and
    /// running jobs fit within capacity. False on violation.
    bool capacity_invariant_holds() const;

    void append_log(LogEntry entry) { log_.push_back(std::move(entry)); }

    // Deserialization support: install state exactly as serialized, without
    // routing checks or log entries.
    void restore_clock(VirtualMs t) { clock_ = t; }
    void restore_node_state(const std::string& id, bool up, double background_load);
    void restore_job(JobState job);
    void restore_counters(std::int64_t arrivals, std::int64_t completed, std::int64_t failed);

private:
    friend class Routing;

    NodeState& node_mut(const std::string& id);
    void allocate(NodeState& node, const JobSpec& spec, int sign);
    void refresh_violation(JobState& job, const Routing& routing);
    void refresh_all_violations();
    void handle_node_failure(NodeState& node);

    VirtualMs clock_ = 0;
    std::map<std::string, NodeState> nodes_;
    std::map<LinkKey, LinkSpec> links_;
    std::map<std::string, JobState> jobs_; // queued + active only
    std::vector<LogEntry> log_;
    std::set<std::string> seen_job_ids_;
    std::int64_t arrivals_ = 0;
    std::int64_t completed_ = 0;
    std::int64_t failed_ = 0;
};

} // namespace edgetwin
