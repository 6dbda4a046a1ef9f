#include "edgetwin/scheduler.hpp"

#include <algorithm>
#include <cmath>

namespace edgetwin::sched {

std::vector<const JobState*> queued_in_order(const TwinState& snapshot) {
    std::vector<const JobState*> queued;
    for (const auto& [id, job] : snapshot.jobs()) {
        if (job.phase == JobPhase::Queued) queued.push_back(&job);
    }
    std::sort(queued.begin(), queued.end(), [](const JobState* a, const JobState* b) {
        if (a->spec.priority != b->spec.priority) return a->spec.priority > b->spec.priority;
        if (a->spec.arrival_ms != b->spec.arrival_ms) return a->spec.arrival_ms < b->spec.arrival_ms;
        return a->spec.id < b->spec.id;
    });
    return queued;
}

namespace {

std::vector<const JobState*> running_in_order(const TwinState& snapshot) {
    std::vector<const JobState*> running;
    for (const auto& [id, job] : snapshot.jobs()) {
        if (job.phase == JobPhase::Running && job.spec.migratable) running.push_back(&job);
    }
    std::sort(running.begin(), running.end(), [](const JobState* a, const JobState* b) {
        if (a->spec.priority != b->spec.priority) return a->spec.priority > b->spec.priority;
        if (a->spec.arrival_ms != b->spec.arrival_ms) return a->spec.arrival_ms < b->spec.arrival_ms;
        return a->spec.id < b->spec.id;
    });
    return running;
}

} // namespace

CapacityLedger::CapacityLedger(const TwinState& snapshot) : snapshot_(&snapshot) {
    for (const auto& [id, node] : snapshot.nodes()) {
        free_[id] = Free{node.free_cpu(), node.free_mem(), node.free_storage()};
    }
}

bool CapacityLedger::fits(const JobSpec& job, const std::string& node_id) const {
    const Free& f = free_.at(node_id);
    return job.cpu_m <= f.cpu && job.mem_mib <= f.mem && job.storage_gib <= f.storage;
}

void CapacityLedger::place(const JobSpec& job, const std::string& node_id) {
    Free& f = free_.at(node_id);
    f.cpu -= job.cpu_m;
    f.mem -= job.mem_mib;
    f.storage -= job.storage_gib;
}

void CapacityLedger::remove(const JobSpec& job, const std::string& node_id) {
    Free& f = free_.at(node_id);
    f.cpu += job.cpu_m;
    f.mem += job.mem_mib;
    f.storage += job.storage_gib;
}

std::int64_t CapacityLedger::free_cpu(const std::string& node_id) const {
    return free_.at(node_id).cpu;
}
std::int64_t CapacityLedger::free_mem(const std::string& node_id) const {
    return free_.at(node_id).mem;
}
std::int64_t CapacityLedger::free_storage(const std::string& node_id) const {
    return free_.at(node_id).storage;
}

bool feasible(const TwinState& snapshot, const CapacityLedger& ledger, const Routing& routing,
              const JobSpec& job, const std::string& node_id) {
    const NodeState& node = snapshot.node(node_id);
    if (!node.up) return false;
    if (!job.allowed_tiers.empty() && !job.allowed_tiers.count(node.spec.tier)) return false;
    if (!job.allowed_zones.empty() && !job.allowed_zones.count(node.spec.zone())) return false;
    if (!ledger.fits(job, node_id)) return false;
    if (job.data_source && !snapshot.resolve_data_source(*job.data_source, node_id, routing))
        return false;
    return true;
}

namespace {

double frac_or_zero(std::int64_t used, std::int64_t cap) {
    return cap > 0 ? static_cast<double>(used) / static_cast<double>(cap) : 0.0;
}

/// Mean leftover fraction across cpu/mem/storage after hypothetically placing
/// the job. Zero-capacity resources count as leftover 0.
double mean_leftover(const CapacityLedger& ledger, const TwinState& snapshot, const JobSpec& job,
                     const std::string& node_id) {
    const NodeSpec& spec = snapshot.node(node_id).spec;
    const double cpu = frac_or_zero(ledger.free_cpu(node_id) - job.cpu_m, spec.cpu_m);
    const double mem = frac_or_zero(ledger.free_mem(node_id) - job.mem_mib, spec.mem_mib);
    const double storage =
        frac_or_zero(ledger.free_storage(node_id) - job.storage_gib, spec.storage_gib);
    return (cpu + mem + storage) / 3.0;
}

double utilization_with(const CapacityLedger& ledger, const TwinState& snapshot,
                        const std::string& node_id, const JobSpec* extra) {
    const NodeState& node = snapshot.node(node_id);
    const NodeSpec& spec = node.spec;
    std::int64_t cpu = spec.cpu_m - ledger.free_cpu(node_id);
    std::int64_t mem = spec.mem_mib - ledger.free_mem(node_id);
    std::int64_t storage = spec.storage_gib - ledger.free_storage(node_id);
    if (extra) {
        cpu += extra->cpu_m;
        mem += extra->mem_mib;
        storage += extra->storage_gib;
    }
    double u = std::max({frac_or_zero(cpu, spec.cpu_m), frac_or_zero(mem, spec.mem_mib),
                         frac_or_zero(storage, spec.storage_gib)});
    return std::clamp(u + node.background_load, 0.0, 1.0);
}

double score_with(const TwinState& snapshot, const CapacityLedger& ledger,
                  const Routing& routing, const JobSpec& job, const std::string& node_id,
                  const WeightVector& w) {
    const NodeSpec& spec = snapshot.node(node_id).spec;

    const double s_fit = 1.0 - mean_leftover(ledger, snapshot, job, node_id);

    double s_lat = 1.0;
    if (job.latency_bound_ms && job.data_source) {
        s_lat = 0.0;
        if (auto source = snapshot.resolve_data_source(*job.data_source, node_id, routing)) {
            if (auto lat = routing.latency(node_id, *source)) {
                const double bound = static_cast<double>(*job.latency_bound_ms);
                s_lat = bound > 0.0
                            ? std::max(0.0, 1.0 - static_cast<double>(*lat) / bound)
                            : (*lat == 0 ? 1.0 : 0.0);
            }
        }
    }

    const double u_before = utilization_with(ledger, snapshot, node_id, nullptr);
    const double u_after = utilization_with(ledger, snapshot, node_id, &job);
    const double marginal = node_power(spec, u_after) - node_power(spec, u_before);
    const double s_en = spec.power_max_w > 0.0 ? 1.0 - marginal / spec.power_max_w : 1.0;

    const double s_bal = 1.0 - u_after;

    return w.w_fit * s_fit + w.w_latency * s_lat + w.w_energy * s_en + w.w_balance * s_bal;
}

/// Best-scoring feasible node, ties to lowest id (nodes iterate in id order).
std::optional<std::string> argmax_node(const TwinState& snapshot, const CapacityLedger& ledger,
                                       const Routing& routing, const JobSpec& job,
                                       const WeightVector& w) {
    std::optional<std::string> best;
    double best_score = 0.0;
    for (const auto& [id, node] : snapshot.nodes()) {
        if (!feasible(snapshot, ledger, routing, job, id)) continue;
        const double s = score_with(snapshot, ledger, routing, job, id, w);
        if (!best || s > best_score) {
            best = id;
            best_score = s;
        }
    }
    return best;
}

} // namespace

double score_weighted(const TwinState& snapshot, const JobSpec& job, const std::string& node_id,
                      const WeightVector& w) {
    CapacityLedger ledger(snapshot);
    Routing routing(snapshot);
    if (!feasible(snapshot, ledger, routing, job, node_id))
        throw Error("infeasible", job.id + " on " + node_id);
    return score_with(snapshot, ledger, routing, job, node_id, w);
}

std::vector<Decision> decide_first_fit(const TwinState& snapshot) {
    std::vector<Decision> decisions;
    CapacityLedger ledger(snapshot);
    Routing routing(snapshot);
    for (const JobState* job : queued_in_order(snapshot)) {
        bool placed = false;
        for (const auto& [id, node] : snapshot.nodes()) {
            if (!feasible(snapshot, ledger, routing, job->spec, id)) continue;
            decisions.push_back(Decision::place(job->spec.id, id));
            ledger.place(job->spec, id);
            placed = true;
            break;
        }
        if (!placed) decisions.push_back(Decision::delay(job->spec.id));
    }
    return decisions;
}

std::vector<Decision> decide_best_fit(const TwinState& snapshot) {
    std::vector<Decision> decisions;
    CapacityLedger ledger(snapshot);
    Routing routing(snapshot);
    for (const JobState* job : queued_in_order(snapshot)) {
        std::optional<std::string> best;
        double best_leftover = 0.0;
        for (const auto& [id, node] : snapshot.nodes()) {
            if (!feasible(snapshot, ledger, routing, job->spec, id)) continue;
            const double leftover = mean_leftover(ledger, snapshot, job->spec, id);
            if (!best || leftover < best_leftover) {
                best = id;
                best_leftover = leftover;
            }
        }
        if (best) {
            decisions.push_back(Decision::place(job->spec.id, *best));
            ledger.place(job->spec, *best);
        } else {
            decisions.push_back(Decision::delay(job->spec.id));
        }
    }
    return decisions;
}

std::vector<Decision> decide_weighted(const TwinState& snapshot, const WeightVector& w) {
    std::vector<Decision> decisions;
    CapacityLedger ledger(snapshot);
    Routing routing(snapshot);

    for (const JobState* job : queued_in_order(snapshot)) {
        if (auto best = argmax_node(snapshot, ledger, routing, job->spec, w)) {
            decisions.push_back(Decision::place(job->spec.id, *best));
            ledger.place(job->spec, *best);
        } else {
            decisions.push_back(Decision::delay(job->spec.id));
        }
    }

    // Rescheduling: migrate a running job when some node beats its current
    // placement by more than the threshold, scored as if the job were lifted
    // off its node first.
    for (const JobState* job : running_in_order(snapshot)) {
        const std::string& current = *job->node;
        ledger.remove(job->spec, current);
        const double current_score =
            feasible(snapshot, ledger, routing, job->spec, current)
                ? score_with(snapshot, ledger, routing, job->spec, current, w)
                : 0.0;
        auto best = argmax_node(snapshot, ledger, routing, job->spec, w);
        if (best && *best != current) {
            const double gain =
                score_with(snapshot, ledger, routing, job->spec, *best, w) - current_score;
            if (gain > w.migrate_threshold) {
                decisions.push_back(Decision::migrate(job->spec.id, *best));
                ledger.place(job->spec, *best);
                continue;
            }
        }
        ledger.place(job->spec, current);
    }
    return decisions;
}

} // namespace edgetwin::sched
