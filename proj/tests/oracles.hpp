// Independent oracles for property and acceptance tests. These deliberately
// use brute-force enumeration instead of the library's algorithms.
#pragma once

#include "edgetwin/scenario.hpp"
#include "edgetwin/twin.hpp"
#include "edgetwin/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace oracles {

using namespace edgetwin;

struct PathResult {
    VirtualMs latency = 0;
    double bottleneck = 0.0;
    std::vector<std::string> seq;
};

/// Exhaustive enumeration of every simple path over up links between up
/// nodes; minimum latency, ties broken by lexicographic node-id sequence.
inline std::optional<PathResult> brute_force_path(const TwinState& state, const std::string& a,
                                                  const std::string& b) {
    if (a == b) return PathResult{0, 0.0, {a}};
    std::map<std::string, std::vector<std::pair<std::string, const LinkSpec*>>> adj;
    for (const auto& [key, link] : state.links()) {
        if (!link.up || !state.node(link.a).up || !state.node(link.b).up) continue;
        adj[link.a].emplace_back(link.b, &link);
        adj[link.b].emplace_back(link.a, &link);
    }
    std::optional<PathResult> best;
    std::vector<std::string> seq{a};
    std::set<std::string> visited{a};

    std::function<void(const std::string&, VirtualMs, double)> dfs =
        [&](const std::string& at, VirtualMs lat, double bneck) {
            if (at == b) {
                PathResult candidate{lat, bneck, seq};
                if (!best || candidate.latency < best->latency ||
                    (candidate.latency == best->latency && candidate.seq < best->seq))
                    best = candidate;
                return;
            }
            auto it = adj.find(at);
            if (it == adj.end()) return;
            for (const auto& [next, link] : it->second) {
                if (visited.count(next)) continue;
                visited.insert(next);
                seq.push_back(next);
                dfs(next, lat + link->latency_ms,
                    seq.size() == 2 ? link->bandwidth_mbps
                                    : std::min(bneck, link->bandwidth_mbps));
                seq.pop_back();
                visited.erase(next);
            }
        };
    dfs(a, 0, 0.0);
    return best;
}

// --- Small-instance optimal placement oracle ---------------------------------

struct OracleJob {
    std::string id;
    VirtualMs arrival = 0;
    std::int64_t cpu = 0, mem = 0, storage = 0;
    VirtualMs duration = 1;
    /// Transfer delay per node id; nullopt = infeasible (unreachable source).
    std::map<std::string, std::optional<VirtualMs>> transfer;
};

struct OracleNode {
    std::string id;
    std::int64_t cpu = 0, mem = 0, storage = 0;
};

struct OraclePlacement {
    VirtualMs t = 0;
    std::string job;
    std::string node;
};

struct OracleSchedule {
    std::vector<OraclePlacement> placements; // chronological
    std::map<std::string, VirtualMs> completion;
    double mean_response = 0.0;
    double p95_response = 0.0;
    VirtualMs makespan = 0;
};

/// Exhaustive search over placement assignments and placement times on the
/// event grid (arrivals and completions), minimizing total response time.
/// Assumes no failures and no migration; durations are node-independent.
class PlacementOracle {
public:
    PlacementOracle(std::vector<OracleNode> nodes, std::vector<OracleJob> jobs)
        : nodes_(std::move(nodes)), jobs_(std::move(jobs)) {
        std::sort(jobs_.begin(), jobs_.end(),
                  [](const OracleJob& x, const OracleJob& y) { return x.id < y.id; });
        std::sort(nodes_.begin(), nodes_.end(),
                  [](const OracleNode& x, const OracleNode& y) { return x.id < y.id; });
    }

    /// nullopt when no schedule completes every job.
    std::optional<OracleSchedule> solve() {
        best_total_ = -1;
        assignment_.assign(jobs_.size(), Slot{});
        current_.clear();
        VirtualMs t0 = jobs_.empty() ? 0 : jobs_.front().arrival;
        for (const auto& j : jobs_) t0 = std::min(t0, j.arrival);
        seen_.clear();
        search(t0, 0);
        if (best_total_ < 0) return std::nullopt;

        OracleSchedule schedule;
        schedule.placements = best_placements_;
        std::vector<VirtualMs> responses;
        VirtualMs makespan = 0;
        for (std::size_t i = 0; i < jobs_.size(); ++i) {
            const auto& p = best_assignment_[i];
            const VirtualMs completion = p.start + *jobs_[i].transfer.at(p.node) +
                                         jobs_[i].duration;
            schedule.completion[jobs_[i].id] = completion;
            responses.push_back(completion - jobs_[i].arrival);
            makespan = std::max(makespan, completion);
        }
        double sum = 0;
        for (VirtualMs r : responses) sum += static_cast<double>(r);
        schedule.mean_response = sum / static_cast<double>(responses.size());
        std::sort(responses.begin(), responses.end());
        const std::size_t rank = static_cast<std::size_t>(
            std::ceil(0.95 * static_cast<double>(responses.size())));
        schedule.p95_response = static_cast<double>(responses[rank - 1]);
        schedule.makespan = makespan;
        return schedule;
    }

private:
    struct Slot {
        bool placed = false;
        std::string node;
        VirtualMs start = 0;
    };

    VirtualMs completion_of(std::size_t job, const Slot& slot) const {
        return slot.start + *jobs_[job].transfer.at(slot.node) + jobs_[job].duration;
    }

    bool fits(std::size_t job, const std::string& node_id, VirtualMs t) const {
        const OracleJob& j = jobs_[job];
        auto tx = j.transfer.at(node_id);
        if (!tx) return false;
        const OracleNode& node =
            *std::find_if(nodes_.begin(), nodes_.end(),
                          [&](const OracleNode& n) { return n.id == node_id; });
        // Occupancy on [t, ...) only decreases, so the start instant decides.
        std::int64_t cpu = j.cpu, mem = j.mem, storage = j.storage;
        for (std::size_t k = 0; k < jobs_.size(); ++k) {
            if (!assignment_[k].placed || assignment_[k].node != node_id) continue;
            if (completion_of(k, assignment_[k]) > t) {
                cpu += jobs_[k].cpu;
                mem += jobs_[k].mem;
                storage += jobs_[k].storage;
            }
        }
        return cpu <= node.cpu && mem <= node.mem && storage <= node.storage;
    }

    std::string state_key(VirtualMs t) const {
        std::string key = std::to_string(t);
        for (const auto& slot : assignment_) {
            key += '|';
            if (slot.placed) key += slot.node + "@" + std::to_string(slot.start);
        }
        return key;
    }

    void record_if_best() {
        VirtualMs total = 0;
        for (std::size_t i = 0; i < jobs_.size(); ++i)
            total += completion_of(i, assignment_[i]) - jobs_[i].arrival;
        if (best_total_ < 0 || total < best_total_) {
            best_total_ = total;
            best_assignment_ = assignment_;
            best_placements_ = current_;
        }
    }

    VirtualMs lower_bound(VirtualMs t) const {
        VirtualMs bound = 0;
        for (std::size_t i = 0; i < jobs_.size(); ++i) {
            if (assignment_[i].placed) {
                bound += completion_of(i, assignment_[i]) - jobs_[i].arrival;
            } else {
                VirtualMs best_tx = -1;
                for (const auto& [node, tx] : jobs_[i].transfer)
                    if (tx && (best_tx < 0 || *tx < best_tx)) best_tx = *tx;
                if (best_tx < 0) return -1; // job can never run
                bound += std::max(jobs_[i].arrival, t) + best_tx + jobs_[i].duration -
                         jobs_[i].arrival;
            }
        }
        return bound;
    }

    void search(VirtualMs t, std::size_t depth) {
        const VirtualMs lb = lower_bound(t);
        if (lb < 0) return;
        if (best_total_ >= 0 && lb >= best_total_) return;
        if (!seen_.insert(state_key(t)).second) return;

        bool all_placed = true;
        for (const auto& slot : assignment_)
            if (!slot.placed) all_placed = false;
        if (all_placed) {
            record_if_best();
            return;
        }

        // Branch: place one arrived job now...
        for (std::size_t i = 0; i < jobs_.size(); ++i) {
            if (assignment_[i].placed || jobs_[i].arrival > t) continue;
            for (const auto& node : nodes_) {
                if (!fits(i, node.id, t)) continue;
                assignment_[i] = Slot{true, node.id, t};
                current_.push_back({t, jobs_[i].id, node.id});
                search(t, depth + 1);
                current_.pop_back();
                assignment_[i] = Slot{};
            }
        }
        // ...or advance to the next point on the event grid.
        VirtualMs next = -1;
        for (const auto& j : jobs_)
            if (j.arrival > t && (next < 0 || j.arrival < next)) next = j.arrival;
        for (std::size_t k = 0; k < jobs_.size(); ++k) {
            if (!assignment_[k].placed) continue;
            const VirtualMs c = completion_of(k, assignment_[k]);
            if (c > t && (next < 0 || c < next)) next = c;
        }
        if (next >= 0) search(next, depth + 1);
    }

    std::vector<OracleNode> nodes_;
    std::vector<OracleJob> jobs_;
    std::vector<Slot> assignment_;
    std::vector<Slot> best_assignment_;
    std::vector<OraclePlacement> current_;
    std::vector<OraclePlacement> best_placements_;
    VirtualMs best_total_ = -1;
    std::set<std::string> seen_;
};

/// Build oracle inputs from a scenario (no-failure, placement-only subset).
inline std::pair<std::vector<OracleNode>, std::vector<OracleJob>>
oracle_inputs(const scenario::Scenario& s) {
    TwinState state(s.nodes, s.links);
    std::vector<OracleNode> nodes;
    for (const auto& n : s.nodes)
        nodes.push_back({n.id, n.cpu_m, n.mem_mib, n.storage_gib});
    std::vector<OracleJob> jobs;
    for (const auto& e : s.events) {
        const auto* arrival = std::get_if<JobArrival>(&e.payload);
        if (!arrival) continue;
        const JobSpec& spec = arrival->job;
        OracleJob job{spec.id, e.t, spec.cpu_m, spec.mem_mib, spec.storage_gib,
                      spec.duration_ms, {}};
        for (const auto& n : s.nodes) {
            std::optional<VirtualMs> tx = 0;
            if (spec.data_source && spec.data_size_mb > 0) {
                auto path = brute_force_path(state, n.id, *spec.data_source);
                if (!path) tx = std::nullopt;
                else if (!path->seq.empty() && path->seq.size() > 1)
                    tx = path->latency +
                         static_cast<VirtualMs>(
                             std::ceil(spec.data_size_mb * 8.0 * 1000.0 / path->bottleneck));
                else tx = 0;
            }
            job.transfer[n.id] = tx;
        }
        jobs.push_back(std::move(job));
    }
    return {std::move(nodes), std::move(jobs)};
}

} // namespace oracles
