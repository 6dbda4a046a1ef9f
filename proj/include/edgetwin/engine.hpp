#pragma once

#include "edgetwin/scenario.hpp"
#include "edgetwin/scheduler.hpp"
#include "edgetwin/twin.hpp"
#include "edgetwin/types.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace edgetwin::engine {

struct EngineConfig {
    /// Reschedule tick spacing in virtual ms; 0 disables ticks.
    VirtualMs reschedule_interval_ms = 10000;
    /// Reject placements that would violate the latency bound instead of
    /// recording them.
    bool strict_latency = false;
    /// Run window length; unset = run to exhaustion.
    std::optional<VirtualMs> horizon_ms;
    std::uint64_t rng_seed = 0;
    /// Assert the capacity invariant after every decision step.
    bool check_invariants = false;
};

struct KPIReport {
    std::int64_t jobs_arrived = 0;      // in-flight at window start + arrivals in window
    std::int64_t jobs_completed = 0;
    std::int64_t jobs_failed = 0;
    double mean_response_ms = 0.0;      // completion - arrival, over completed
    double p95_response_ms = 0.0;       // nearest-rank
    std::int64_t latency_violation_count = 0; // terminal jobs violating their bound
    double energy_wh = 0.0;
    double mean_cpu_utilization = 0.0;  // time-weighted over up nodes
    std::int64_t migrations = 0;
    std::int64_t restarts = 0;
    VirtualMs makespan_ms = 0;          // window start to last terminal event
    std::int64_t decision_faults = 0;   // rejected scheduler decisions
    VirtualMs horizon_ms = 0;           // window length, for normalization
    double energy_upper_bound_wh = 0.0; // all nodes at power_max over the window

    bool operator==(const KPIReport&) const = default;
};

struct RunResult {
    TwinState state;
    KPIReport report;
    /// Timestamps at which the scheduler was invoked.
    std::vector<VirtualMs> decision_points;
    /// Index into state.log() where this run began appending.
    std::size_t log_begin = 0;
};

/// Fitness scalarization weights.
struct Objective {
    double alpha = 1.0; // throughput
    double beta = 1.0;  // response time
    double gamma = 1.0; // energy
    double delta = 1.0; // latency violations
};

/// One decision point against live state: snapshot, decide, validate each
/// decision in order, apply or reject. Returns the applied decisions.
std::vector<Decision> step(TwinState& state, sched::Scheduler& scheduler,
                           const EngineConfig& config);

/// Drive `events` (nondecreasing, at or after state.clock()) through an
/// existing state for the configured horizon. Mutates `state`; the report
/// covers exactly this window.
KPIReport run_from(TwinState& state, std::span<const ScenarioEvent> events,
                   sched::Scheduler& scheduler, const EngineConfig& config,
                   std::vector<VirtualMs>* decision_points = nullptr);

/// Load a scenario into a fresh twin and run it.
RunResult run(const scenario::Scenario& s, sched::Scheduler& scheduler,
              const EngineConfig& config);

/// Statistics over a run's event log. `from_index` marks the first entry of
/// the window; earlier entries only build carry-in state. For states whose
/// log does not reach back to their origin (restored snapshots),
/// `window_start_state` supplies the in-flight jobs and node runtime at the
/// window start instead of a prefix replay.
KPIReport compute_kpis(const std::vector<LogEntry>& log, const std::vector<NodeSpec>& topology,
                       std::size_t from_index = 0, VirtualMs window_start = 0,
                       VirtualMs window_end = -1, const TwinState* window_start_state = nullptr);

/// alpha*(completed/arrived) - beta*(mean_response/horizon)
/// - gamma*(energy/energy_upper_bound) - delta*(violations/arrived).
/// Ratios with zero denominators contribute 0.
double fitness(const KPIReport& report, const Objective& objective);

/// Clone the state, inject hypothetical events, run the engine for `horizon`
/// with the given scheduler, and report KPIs over the forecast window. The
/// live state is not modified.
KPIReport forecast(const TwinState& state, std::span<const ScenarioEvent> hypothetical,
                   VirtualMs horizon, sched::Scheduler& scheduler, EngineConfig config = {});

/// Wire form of the run's decision log: one {t, actor, action, job, node,
/// outcome} JSON record per line.
std::string decision_log_text(const TwinState& state, std::size_t log_begin = 0);

/// Flat key-value document, stable for golden-file comparison.
std::string kpi_report_text(const KPIReport& report);

} // namespace edgetwin::engine
