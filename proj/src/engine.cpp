#include "edgetwin/engine.hpp"

#include "edgetwin/serialization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace edgetwin::engine {

namespace {

bool would_violate_bound(const TwinState& state, const JobSpec& job, const std::string& node_id,
                         const Routing& routing) {
    if (!job.latency_bound_ms || !job.data_source) return false;
    auto source = state.resolve_data_source(*job.data_source, node_id, routing);
    if (!source) return true;
    auto lat = routing.latency(node_id, *source);
    return !lat || *lat > *job.latency_bound_ms;
}

} // namespace

std::vector<Decision> step(TwinState& state, sched::Scheduler& scheduler,
                           const EngineConfig& config) {
    const TwinState view = state.scheduler_view();
    const std::vector<Decision> decisions = scheduler.decide(view);
    const std::string actor = "scheduler:" + scheduler.name();

    std::vector<Decision> applied;
    Routing routing(state); // placements do not affect routing; events do not occur mid-step
    std::set<std::string> decided;

    for (const Decision& d : decisions) {
        std::optional<std::string> reject;
        switch (d.kind) {
        case DecisionKind::Place:
            if (!decided.insert(d.job).second) reject = "duplicate-decision";
            if (!reject) reject = state.check_place(d.job, d.node, routing);
            if (!reject && config.strict_latency &&
                would_violate_bound(state, state.job(d.job).spec, d.node, routing))
                reject = "latency";
            if (!reject) state.place_job(d.job, d.node, actor);
            break;
        case DecisionKind::Migrate:
            if (!decided.insert(d.job).second) reject = "duplicate-decision";
            if (!reject) reject = state.check_migrate(d.job, d.node, routing);
            if (!reject && config.strict_latency &&
                would_violate_bound(state, state.job(d.job).spec, d.node, routing))
                reject = "latency";
            if (!reject) state.migrate_job(d.job, d.node, actor);
            break;
        case DecisionKind::Delay:
            if (!decided.insert(d.job).second) reject = "duplicate-decision";
            if (!reject && !state.has_job(d.job)) reject = "unknown-job";
            if (!reject && state.job(d.job).phase != JobPhase::Queued) reject = "not-queued";
            if (!reject)
                state.append_log({state.clock(), actor, "delay", d.job, "", "applied",
                                  std::nullopt});
            break;
        case DecisionKind::NoOp:
            state.append_log({state.clock(), actor, "no_op", "", "", "applied", std::nullopt});
            break;
        }
        if (reject) {
            state.append_log({state.clock(), actor, to_string(d.kind), d.job, d.node,
                              "rejected:" + *reject, std::nullopt});
        } else {
            applied.push_back(d);
        }
    }
    if (config.check_invariants && !state.capacity_invariant_holds())
        throw Error("invariant", "capacity invariant violated after step");
    return applied;
}

KPIReport run_from(TwinState& state, std::span<const ScenarioEvent> events,
                   sched::Scheduler& scheduler, const EngineConfig& config,
                   std::vector<VirtualMs>* decision_points) {
    const VirtualMs start = state.clock();
    const std::size_t log_begin = state.log().size();
    const TwinState start_view = state.scheduler_view();
    std::optional<VirtualMs> end;
    if (config.horizon_ms) end = start + *config.horizon_ms;

    VirtualMs prev = start;
    for (const ScenarioEvent& e : events) {
        if (e.t < prev) throw Error("malformed-timeline", "event times must be nondecreasing");
        if (end && e.t > *end) break; // later events fall outside the window
        prev = e.t;
    }

    const VirtualMs interval = config.reschedule_interval_ms;
    if (interval < 0) throw Error("invalid-value", "reschedule interval must be >= 0");
    std::size_t ei = 0;
    VirtualMs next_tick = start + interval;

    while (true) {
        std::optional<VirtualMs> t_ev;
        if (ei < events.size() && (!end || events[ei].t <= *end)) t_ev = events[ei].t;
        std::optional<VirtualMs> t_int = state.next_transition();
        if (t_int && end && *t_int > *end) t_int.reset();
        std::optional<VirtualMs> t_tick;
        if (interval > 0 && (!end || next_tick <= *end)) t_tick = next_tick;

        if (!t_ev && !t_int) {
            if (!t_tick) break;
            // Only ticks left: without queued work the state is final.
            bool any_queued = false;
            for (const auto& [id, job] : state.jobs())
                if (job.phase == JobPhase::Queued) any_queued = true;
            if (!any_queued) break;
        }

        VirtualMs t = std::numeric_limits<VirtualMs>::max();
        if (t_ev) t = std::min(t, *t_ev);
        if (t_int) t = std::min(t, *t_int);
        if (t_tick) t = std::min(t, *t_tick);

        // Tie order at equal time: scenario events, internal completions,
        // reschedule tick, then one scheduler invocation.
        state.advance_to(t, false);
        bool any_events = false;
        while (ei < events.size() && events[ei].t == t && (!end || t <= *end)) {
            state.apply_event(events[ei], "scenario");
            ++ei;
            any_events = true;
        }
        state.fire_due_transitions();
        bool ticked = false;
        if (t_tick && *t_tick == t) {
            ticked = true;
            next_tick += interval;
        }
        if (any_events || ticked) {
            if (decision_points) decision_points->push_back(t);
            const auto applied = step(state, scheduler, config);
            const bool changed =
                std::any_of(applied.begin(), applied.end(), [](const Decision& d) {
                    return d.kind == DecisionKind::Place || d.kind == DecisionKind::Migrate;
                });
            // Quiescent tick: no event, nothing applied, nothing pending. Every
            // further tick would see the same snapshot and decide the same.
            if (ticked && !any_events && !changed && !state.next_transition() &&
                ei >= events.size())
                break;
        }
    }
    if (end) state.advance_to(*end);

    return compute_kpis(state.log(), state.node_specs(), log_begin, start, state.clock(),
                        &start_view);
}

RunResult run(const scenario::Scenario& s, sched::Scheduler& scheduler,
              const EngineConfig& config) {
    auto issues = scenario::validate_scenario(s);
    if (!issues.empty())
        throw Error(issues.front().code, issues.front().path + ": " + issues.front().message);
    RunResult result;
    result.state = TwinState(s.nodes, s.links);
    result.log_begin = 0;
    result.report =
        run_from(result.state, s.events, scheduler, config, &result.decision_points);
    return result;
}

KPIReport compute_kpis(const std::vector<LogEntry>& log, const std::vector<NodeSpec>& topology,
                       std::size_t from_index, VirtualMs window_start, VirtualMs window_end,
                       const TwinState* window_start_state) {
    struct ReplayNode {
        NodeSpec spec;
        bool up = true;
        double background = 0.0;
        std::int64_t cpu = 0, mem = 0, storage = 0;
    };
    std::map<std::string, ReplayNode> nodes;
    for (const NodeSpec& spec : topology) nodes[spec.id] = ReplayNode{spec};

    std::map<std::string, VirtualMs> arrival_t;
    std::map<std::string, JobSpec> job_specs;
    std::map<std::string, std::string> placement;
    std::set<std::string> live;

    if (window_start_state) {
        for (const auto& [id, node] : window_start_state->nodes()) {
            nodes.at(id).up = node.up;
            nodes.at(id).background = node.background_load;
        }
        for (const auto& [id, job] : window_start_state->jobs()) {
            arrival_t[id] = job.spec.arrival_ms;
            job_specs[id] = job.spec;
            live.insert(id);
            if (job.active() && job.node) {
                placement[id] = *job.node;
                auto& n = nodes.at(*job.node);
                n.cpu += job.spec.cpu_m;
                n.mem += job.spec.mem_mib;
                n.storage += job.spec.storage_gib;
            }
        }
    }

    if (window_end < 0) {
        window_end = window_start;
        for (const LogEntry& e : log) window_end = std::max(window_end, e.t);
    }

    KPIReport report;
    report.horizon_ms = window_end - window_start;
    std::vector<VirtualMs> responses;
    VirtualMs last_terminal = -1;
    double energy_w_ms = 0.0;
    double cpu_ratio_ms = 0.0;
    VirtualMs cursor = window_start;

    auto integrate_to = [&](VirtualMs t) {
        t = std::min(t, window_end);
        if (t <= cursor) return;
        double power = 0.0;
        std::int64_t cpu_used = 0, cpu_cap = 0;
        for (const auto& [id, n] : nodes) {
            if (!n.up) continue;
            auto frac = [](std::int64_t used, std::int64_t cap) {
                return cap > 0 ? static_cast<double>(used) / static_cast<double>(cap) : 0.0;
            };
            double u = std::max({frac(n.cpu, n.spec.cpu_m), frac(n.mem, n.spec.mem_mib),
                                 frac(n.storage, n.spec.storage_gib)});
            u = std::clamp(u + n.background, 0.0, 1.0);
            power += node_power(n.spec, u);
            cpu_used += n.cpu;
            cpu_cap += n.spec.cpu_m;
        }
        const double dt = static_cast<double>(t - cursor);
        energy_w_ms += power * dt;
        if (cpu_cap > 0)
            cpu_ratio_ms += static_cast<double>(cpu_used) / static_cast<double>(cpu_cap) * dt;
        cursor = t;
    };

    auto alloc = [&](const std::string& node_id, const JobSpec& spec, int sign) {
        auto it = nodes.find(node_id);
        if (it == nodes.end()) return;
        it->second.cpu += sign * spec.cpu_m;
        it->second.mem += sign * spec.mem_mib;
        it->second.storage += sign * spec.storage_gib;
    };

    const std::size_t first = window_start_state ? from_index : 0;
    if (window_start_state) report.jobs_arrived = static_cast<std::int64_t>(live.size());
    for (std::size_t i = first; i < log.size(); ++i) {
        const LogEntry& e = log[i];
        const bool in_window = i >= from_index;
        if (!window_start_state && i == from_index)
            report.jobs_arrived = static_cast<std::int64_t>(live.size());
        if (in_window) integrate_to(e.t);

        if (e.action == "job_arrival" && e.event) {
            const auto& arrival = std::get<JobArrival>(e.event->payload);
            arrival_t[e.job] = e.t;
            job_specs[e.job] = arrival.job;
            live.insert(e.job);
            if (in_window) report.jobs_arrived += 1;
        } else if (e.action == "place" && e.outcome == "applied") {
            placement[e.job] = e.node;
            alloc(e.node, job_specs.at(e.job), +1);
        } else if (e.action == "migrate" && e.outcome == "applied") {
            auto old_node = placement.find(e.job);
            if (old_node != placement.end()) alloc(old_node->second, job_specs.at(e.job), -1);
            placement[e.job] = e.node;
            alloc(e.node, job_specs.at(e.job), +1);
            if (in_window) report.migrations += 1;
        } else if (e.action == "requeue") {
            alloc(e.node, job_specs.at(e.job), -1);
            placement.erase(e.job);
            if (in_window) report.restarts += 1;
        } else if (e.action == "complete") {
            alloc(e.node, job_specs.at(e.job), -1);
            placement.erase(e.job);
            live.erase(e.job);
            if (in_window) {
                report.jobs_completed += 1;
                responses.push_back(e.t - arrival_t.at(e.job));
                if (e.outcome == "violation") report.latency_violation_count += 1;
                last_terminal = std::max(last_terminal, e.t);
            }
        } else if (e.action == "fail") {
            alloc(e.node, job_specs.at(e.job), -1);
            placement.erase(e.job);
            live.erase(e.job);
            if (in_window) {
                report.jobs_failed += 1;
                if (e.outcome == "violation") report.latency_violation_count += 1;
                last_terminal = std::max(last_terminal, e.t);
            }
        } else if (e.action == "node_fail" && e.event) {
            nodes.at(e.node).up = false;
        } else if (e.action == "node_recover" && e.event) {
            nodes.at(e.node).up = true;
        } else if (e.action == "metric_update" && e.event) {
            nodes.at(e.node).background = std::get<MetricUpdate>(e.event->payload).background_load;
        }
        if (in_window && e.outcome.rfind("rejected:", 0) == 0) report.decision_faults += 1;
    }
    if (!window_start_state && from_index >= log.size())
        report.jobs_arrived = static_cast<std::int64_t>(live.size());
    integrate_to(window_end);

    if (!responses.empty()) {
        double sum = 0;
        for (VirtualMs r : responses) sum += static_cast<double>(r);
        report.mean_response_ms = sum / static_cast<double>(responses.size());
        std::sort(responses.begin(), responses.end());
        const std::size_t rank = static_cast<std::size_t>(
            std::ceil(0.95 * static_cast<double>(responses.size())));
        report.p95_response_ms = static_cast<double>(responses[rank - 1]);
    }
    report.energy_wh = energy_w_ms / 3.6e6;
    report.mean_cpu_utilization =
        report.horizon_ms > 0 ? cpu_ratio_ms / static_cast<double>(report.horizon_ms) : 0.0;
    report.makespan_ms = last_terminal >= 0 ? last_terminal - window_start : 0;
    double power_max_sum = 0.0;
    for (const NodeSpec& spec : topology) power_max_sum += spec.power_max_w;
    report.energy_upper_bound_wh =
        power_max_sum * static_cast<double>(report.horizon_ms) / 3.6e6;
    return report;
}

double fitness(const KPIReport& report, const Objective& objective) {
    if (objective.alpha < 0 || objective.beta < 0 || objective.gamma < 0 || objective.delta < 0)
        throw Error("invalid-value", "objective weights must be >= 0");
    auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
    const double arrived = static_cast<double>(report.jobs_arrived);
    return objective.alpha * ratio(static_cast<double>(report.jobs_completed), arrived) -
           objective.beta *
               ratio(report.mean_response_ms, static_cast<double>(report.horizon_ms)) -
           objective.gamma * ratio(report.energy_wh, report.energy_upper_bound_wh) -
           objective.delta * ratio(static_cast<double>(report.latency_violation_count), arrived);
}

KPIReport forecast(const TwinState& state, std::span<const ScenarioEvent> hypothetical,
                   VirtualMs horizon, sched::Scheduler& scheduler, EngineConfig config) {
    if (horizon < 0) throw Error("invalid-value", "horizon must be >= 0");
    VirtualMs prev = state.clock();
    for (const ScenarioEvent& e : hypothetical) {
        if (e.t < prev || e.t > state.clock() + horizon)
            throw Error("malformed-timeline",
                        "hypothetical events must be nondecreasing within the horizon");
        prev = e.t;
    }
    TwinState clone = state.snapshot();
    config.horizon_ms = horizon;
    return run_from(clone, hypothetical, scheduler, config);
}

std::string decision_log_text(const TwinState& state, std::size_t log_begin) {
    std::ostringstream out;
    const auto& log = state.log();
    for (std::size_t i = log_begin; i < log.size(); ++i)
        out << log_entry_to_json(log[i]).dump() << '\n';
    return out.str();
}

std::string kpi_report_text(const KPIReport& report) {
    Json j;
    j["jobs_arrived"] = report.jobs_arrived;
    j["jobs_completed"] = report.jobs_completed;
    j["jobs_failed"] = report.jobs_failed;
    j["mean_response_ms"] = report.mean_response_ms;
    j["p95_response_ms"] = report.p95_response_ms;
    j["latency_violation_count"] = report.latency_violation_count;
    j["energy_wh"] = report.energy_wh;
    j["mean_cpu_utilization"] = report.mean_cpu_utilization;
    j["migrations"] = report.migrations;
    j["restarts"] = report.restarts;
    j["makespan_ms"] = report.makespan_ms;
    j["decision_faults"] = report.decision_faults;
    j["horizon_ms"] = report.horizon_ms;
    j["energy_upper_bound_wh"] = report.energy_upper_bound_wh;
    return j.dump(2) + "\n";
}

} // namespace edgetwin::engine
