#include "edgetwin/twin.hpp"

#include <algorithm>
#include <cmath>

namespace edgetwin {

const char* to_string(Tier tier) {
    switch (tier) {
    case Tier::Iot: return "iot";
    case Tier::Edge: return "edge";
    case Tier::Cloud: return "cloud";
    case Tier::Hpc: return "hpc";
    }
    return "edge";
}

Tier tier_from_string(const std::string& name) {
    if (name == "iot") return Tier::Iot;
    if (name == "edge") return Tier::Edge;
    if (name == "cloud") return Tier::Cloud;
    if (name == "hpc") return Tier::Hpc;
    throw Error("invalid-value", "unknown tier '" + name + "'");
}

const char* to_string(JobPhase phase) {
    switch (phase) {
    case JobPhase::Queued: return "queued";
    case JobPhase::Transferring: return "transferring";
    case JobPhase::Running: return "running";
    case JobPhase::Completed: return "completed";
    case JobPhase::Failed: return "failed";
    }
    return "queued";
}

const char* ScenarioEvent::kind() const {
    switch (payload.index()) {
    case 0: return "job_arrival";
    case 1: return "node_fail";
    case 2: return "node_recover";
    case 3: return "link_change";
    case 4: return "metric_update";
    }
    return "";
}

const char* to_string(DecisionKind kind) {
    switch (kind) {
    case DecisionKind::Place: return "place";
    case DecisionKind::Delay: return "delay";
    case DecisionKind::Migrate: return "migrate";
    case DecisionKind::NoOp: return "no_op";
    }
    return "no_op";
}

double node_utilization(const NodeState& node) {
    auto frac = [](std::int64_t used, std::int64_t cap) {
        return cap > 0 ? static_cast<double>(used) / static_cast<double>(cap) : 0.0;
    };
    double u = std::max({frac(node.cpu_used, node.spec.cpu_m),
                         frac(node.mem_used, node.spec.mem_mib),
                         frac(node.storage_used, node.spec.storage_gib)});
    u += node.background_load;
    return std::clamp(u, 0.0, 1.0);
}

double node_power(const NodeSpec& spec, double utilization) {
    return spec.power_idle_w + (spec.power_max_w - spec.power_idle_w) * utilization;
}

double node_power(const NodeState& node) {
    if (!node.up) return 0.0;
    return node_power(node.spec, node_utilization(node));
}

// --- Routing ------------------------------------------------------------------

Routing::Routing(const TwinState& state) : state_(&state) {
    for (const auto& [id, node] : state.nodes()) {
        if (node.up) node_ids_.push_back(id);
    }
    for (const auto& [key, link] : state.links()) {
        if (!link.up) continue;
        if (!state.has_node(link.a) || !state.has_node(link.b)) continue;
        if (!state.node(link.a).up || !state.node(link.b).up) continue;
        adjacency_[link.a].emplace_back(link.b, &link);
        adjacency_[link.b].emplace_back(link.a, &link);
    }
}

const std::map<std::string, Routing::Reach>& Routing::from(const std::string& source) const {
    auto cached = cache_.find(source);
    if (cached != cache_.end()) return cached->second;

    // Relaxation to fixpoint under the composite order (latency asc, node-id
    // sequence lex asc). Converges because non-simple paths never beat the
    // contracted simple path under this order.
    std::map<std::string, Reach>& best = cache_[source];
    best[source] = Reach{0, 0.0, {source}};
    bool changed = true;
    auto better = [](VirtualMs dist, const std::vector<std::string>& seq, const Reach& cur) {
        if (dist != cur.dist) return dist < cur.dist;
        return seq < cur.seq;
    };
    while (changed) {
        changed = false;
        for (const auto& [from_id, reach] : std::map<std::string, Reach>(best)) {
            auto adj = adjacency_.find(from_id);
            if (adj == adjacency_.end()) continue;
            for (const auto& [to_id, link] : adj->second) {
                VirtualMs dist = reach.dist + link->latency_ms;
                std::vector<std::string> seq = reach.seq;
                seq.push_back(to_id);
                double bneck = reach.seq.size() == 1
                                   ? link->bandwidth_mbps
                                   : std::min(reach.bottleneck, link->bandwidth_mbps);
                auto it = best.find(to_id);
                if (it == best.end() || better(dist, seq, it->second)) {
                    best[to_id] = Reach{dist, bneck, std::move(seq)};
                    changed = true;
                }
            }
        }
    }
    return best;
}

std::optional<VirtualMs> Routing::latency(const std::string& a, const std::string& b) const {
    if (a == b) return 0;
    const auto& reach = from(a);
    auto it = reach.find(b);
    if (it == reach.end()) return std::nullopt;
    return it->second.dist;
}

std::optional<double> Routing::bottleneck(const std::string& a, const std::string& b) const {
    if (a == b) return std::nullopt;
    const auto& reach = from(a);
    auto it = reach.find(b);
    if (it == reach.end()) return std::nullopt;
    return it->second.bottleneck;
}

std::vector<std::string> Routing::path(const std::string& a, const std::string& b) const {
    if (a == b) return {a};
    const auto& reach = from(a);
    auto it = reach.find(b);
    if (it == reach.end()) return {};
    return it->second.seq;
}

// --- TwinState -----------------------------------------------------------------

TwinState::TwinState(std::vector<NodeSpec> nodes, std::vector<LinkSpec> links) {
    for (auto& spec : nodes) {
        if (nodes_.count(spec.id)) throw Error("duplicate-node-id", spec.id);
        if (spec.cpu_m < 0 || spec.mem_mib < 0 || spec.storage_gib < 0)
            throw Error("invalid-value", "negative capacity on node " + spec.id);
        if (spec.power_idle_w < 0 || spec.power_max_w < spec.power_idle_w)
            throw Error("invalid-value", "power bounds on node " + spec.id);
        NodeState state;
        state.spec = std::move(spec);
        nodes_.emplace(state.spec.id, std::move(state));
    }
    for (auto& link : links) {
        if (!has_node(link.a) || !has_node(link.b))
            throw Error("dangling-id", "link endpoint " + link.a + "-" + link.b);
        if (link.a == link.b) throw Error("invalid-value", "self-link on " + link.a);
        if (link.latency_ms < 0 || link.bandwidth_mbps <= 0)
            throw Error("invalid-value", "link parameters " + link.a + "-" + link.b);
        auto key = link_key(link.a, link.b);
        if (links_.count(key)) throw Error("duplicate-link", link.a + "-" + link.b);
        links_.emplace(key, std::move(link));
    }
}

const NodeState& TwinState::node(const std::string& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw Error("unknown-node", id);
    return it->second;
}

NodeState& TwinState::node_mut(const std::string& id) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw Error("unknown-node", id);
    return it->second;
}

const JobState& TwinState::job(const std::string& id) const {
    auto it = jobs_.find(id);
    if (it == jobs_.end()) throw Error("unknown-job", id);
    return it->second;
}

std::vector<NodeSpec> TwinState::node_specs() const {
    std::vector<NodeSpec> specs;
    specs.reserve(nodes_.size());
    for (const auto& [id, node] : nodes_) specs.push_back(node.spec);
    return specs;
}

void TwinState::allocate(NodeState& node, const JobSpec& spec, int sign) {
    node.cpu_used += sign * spec.cpu_m;
    node.mem_used += sign * spec.mem_mib;
    node.storage_used += sign * spec.storage_gib;
}

std::optional<VirtualMs> TwinState::next_transition() const {
    std::optional<VirtualMs> next;
    for (const auto& [id, job] : jobs_) {
        std::optional<VirtualMs> t;
        if (job.phase == JobPhase::Transferring) t = job.transfer_ends;
        else if (job.phase == JobPhase::Running) t = clock_ + job.remaining_work;
        if (t && (!next || *t < *next)) next = t;
    }
    return next;
}

void TwinState::advance_to(VirtualMs t, bool fire_boundary) {
    if (t < clock_) throw Error("ordering", "clock regression");
    while (true) {
        // Earliest due transition, ties by job id (map iteration order).
        std::string due_job;
        VirtualMs due_t = 0;
        bool transfer = false;
        for (const auto& [id, job] : jobs_) {
            std::optional<VirtualMs> jt;
            bool jx = false;
            if (job.phase == JobPhase::Transferring) {
                jt = job.transfer_ends;
                jx = true;
            } else if (job.phase == JobPhase::Running) {
                jt = clock_ + job.remaining_work;
            }
            if (!jt) continue;
            if (*jt > t || (*jt == t && !fire_boundary)) continue;
            if (due_job.empty() || *jt < due_t) {
                due_job = id;
                due_t = *jt;
                transfer = jx;
            }
        }
        if (due_job.empty()) break;

        // Progress running jobs up to the transition time, then fire it.
        VirtualMs dt = due_t - clock_;
        if (dt > 0) {
            for (auto& [id, job] : jobs_) {
                if (job.phase == JobPhase::Running)
                    job.remaining_work = std::max<VirtualMs>(0, job.remaining_work - dt);
            }
            clock_ = due_t;
        }
        JobState& job = jobs_.at(due_job);
        if (transfer) {
            job.phase = JobPhase::Running;
            log_.push_back({clock_, "engine", "run_start", due_job, *job.node, "", std::nullopt});
        } else {
            release_job(due_job, JobPhase::Completed, "engine");
        }
    }
    VirtualMs dt = t - clock_;
    if (dt > 0) {
        for (auto& [id, job] : jobs_) {
            if (job.phase == JobPhase::Running)
                job.remaining_work = std::max<VirtualMs>(0, job.remaining_work - dt);
        }
        clock_ = t;
    }
}

void TwinState::fire_due_transitions() { advance_to(clock_, true); }

void TwinState::handle_node_failure(NodeState& node) {
    // Work on a failed node is lost: migratable jobs requeue from scratch,
    // others fail permanently.
    std::vector<std::string> affected;
    for (const auto& [id, job] : jobs_) {
        if (job.active() && job.node && *job.node == node.spec.id) affected.push_back(id);
    }
    for (const auto& id : affected) {
        JobState& job = jobs_.at(id);
        allocate(node, job.spec, -1);
        if (job.spec.migratable) {
            job.phase = JobPhase::Queued;
            job.node.reset();
            job.remaining_work = job.spec.duration_ms;
            job.restarts += 1;
            job.violation = false;
            log_.push_back({clock_, "twin", "requeue", id, node.spec.id, "restart", std::nullopt});
        } else {
            job.phase = JobPhase::Failed;
            failed_ += 1;
            log_.push_back({clock_, "twin", "fail", id, node.spec.id,
                            job.violation ? "violation" : "ok", std::nullopt});
            jobs_.erase(id);
        }
    }
}

void TwinState::refresh_violation(JobState& job, const Routing& routing) {
    if (!job.spec.latency_bound_ms || !job.spec.data_source || !job.node) {
        job.violation = false;
        return;
    }
    auto source = resolve_data_source(*job.spec.data_source, *job.node, routing);
    if (!source) {
        job.violation = true; // unreachable data counts as violated
        return;
    }
    auto lat = routing.latency(*job.node, *source);
    job.violation = !lat || *lat > *job.spec.latency_bound_ms;
}

void TwinState::refresh_all_violations() {
    Routing routing(*this);
    for (auto& [id, job] : jobs_) {
        if (job.active()) refresh_violation(job, routing);
    }
}

void TwinState::apply_event(const ScenarioEvent& event, const std::string& actor) {
    if (event.t < clock_) throw Error("ordering", "event time before clock");
    // Transitions due exactly at event.t stay pending: same-time scenario
    // events are ordered before internal completions.
    advance_to(event.t, false);

    LogEntry entry{clock_, actor, event.kind(), "", "", "applied", event};

    if (const auto* arrival = std::get_if<JobArrival>(&event.payload)) {
        const JobSpec& spec = arrival->job;
        if (seen_job_ids_.count(spec.id)) throw Error("duplicate-job", spec.id);
        if (spec.duration_ms <= 0 || spec.cpu_m < 0 || spec.mem_mib < 0 || spec.storage_gib < 0 ||
            spec.data_size_mb < 0)
            throw Error("invalid-value", "job " + spec.id);
        if (spec.latency_bound_ms && !spec.data_source)
            throw Error("invalid-value", "latency bound without data source on " + spec.id);
        JobState job;
        job.spec = spec;
        job.spec.arrival_ms = clock_;
        job.remaining_work = spec.duration_ms;
        seen_job_ids_.insert(spec.id);
        arrivals_ += 1;
        entry.job = spec.id;
        jobs_.emplace(spec.id, std::move(job));
        log_.push_back(std::move(entry));
        return;
    }
    if (const auto* fail = std::get_if<NodeFail>(&event.payload)) {
        NodeState& node = node_mut(fail->node);
        entry.node = fail->node;
        log_.push_back(std::move(entry));
        node.up = false;
        handle_node_failure(node);
        refresh_all_violations();
        return;
    }
    if (const auto* recover = std::get_if<NodeRecover>(&event.payload)) {
        NodeState& node = node_mut(recover->node);
        entry.node = recover->node;
        node.up = true;
        log_.push_back(std::move(entry));
        refresh_all_violations();
        return;
    }
    if (const auto* change = std::get_if<LinkChange>(&event.payload)) {
        auto it = links_.find(link_key(change->a, change->b));
        if (it == links_.end()) throw Error("unknown-link", change->a + "-" + change->b);
        if (change->latency_ms < 0 || change->bandwidth_mbps <= 0)
            throw Error("invalid-value", "link parameters " + change->a + "-" + change->b);
        it->second.latency_ms = change->latency_ms;
        it->second.bandwidth_mbps = change->bandwidth_mbps;
        it->second.up = change->up;
        entry.node = change->a + "-" + change->b;
        log_.push_back(std::move(entry));
        refresh_all_violations();
        return;
    }
    if (const auto* metric = std::get_if<MetricUpdate>(&event.payload)) {
        NodeState& node = node_mut(metric->node);
        if (metric->background_load < 0.0 || metric->background_load > 1.0)
            throw Error("invalid-value", "background load outside [0,1]");
        node.background_load = metric->background_load;
        entry.node = metric->node;
        log_.push_back(std::move(entry));
        return;
    }
}

std::optional<std::string> TwinState::check_place(const std::string& job_id,
                                                  const std::string& node_id,
                                                  const Routing& routing) const {
    auto jit = jobs_.find(job_id);
    if (jit == jobs_.end()) return "unknown-job";
    const JobState& job = jit->second;
    if (job.phase != JobPhase::Queued) return "not-queued";
    auto nit = nodes_.find(node_id);
    if (nit == nodes_.end()) return "unknown-node";
    const NodeState& node = nit->second;
    if (!node.up) return "node-down";
    const JobSpec& spec = job.spec;
    if (!spec.allowed_tiers.empty() && !spec.allowed_tiers.count(node.spec.tier))
        return "constraint";
    if (!spec.allowed_zones.empty() && !spec.allowed_zones.count(node.spec.zone()))
        return "constraint";
    if (spec.cpu_m > node.free_cpu() || spec.mem_mib > node.free_mem() ||
        spec.storage_gib > node.free_storage())
        return "capacity-exceeded";
    if (spec.data_source && !resolve_data_source(*spec.data_source, node_id, routing))
        return "unreachable";
    return std::nullopt;
}

void TwinState::place_job(const std::string& job_id, const std::string& node_id,
                          const std::string& actor) {
    Routing routing(*this);
    if (auto reason = check_place(job_id, node_id, routing)) throw Error(*reason, job_id);

    JobState& job = jobs_.at(job_id);
    NodeState& node = nodes_.at(node_id);
    allocate(node, job.spec, +1);
    job.node = node_id;
    job.placed_at = clock_;
    refresh_violation(job, routing);

    VirtualMs transfer = 0;
    if (job.spec.data_source && job.spec.data_size_mb > 0) {
        auto source = resolve_data_source(*job.spec.data_source, node_id, routing);
        auto lat = routing.latency(node_id, *source);
        auto bw = routing.bottleneck(node_id, *source);
        if (node_id != *source)
            transfer = *lat + static_cast<VirtualMs>(
                                  std::ceil(job.spec.data_size_mb * 8.0 * 1000.0 / *bw));
    }
    if (transfer > 0) {
        job.phase = JobPhase::Transferring;
        job.transfer_ends = clock_ + transfer;
    } else {
        job.phase = JobPhase::Running;
        job.transfer_ends = clock_;
    }
    log_.push_back({clock_, actor, "place", job_id, node_id, "applied", std::nullopt});
}

std::optional<std::string> TwinState::check_migrate(const std::string& job_id,
                                                    const std::string& node_id,
                                                    const Routing& routing) const {
    auto jit = jobs_.find(job_id);
    if (jit == jobs_.end()) return "unknown-job";
    const JobState& job = jit->second;
    if (job.phase != JobPhase::Running) return "not-running";
    if (!job.spec.migratable) return "not-migratable";
    if (*job.node == node_id) return "same-node";
    auto nit = nodes_.find(node_id);
    if (nit == nodes_.end()) return "unknown-node";
    const NodeState& node = nit->second;
    if (!node.up) return "node-down";
    const JobSpec& spec = job.spec;
    if (!spec.allowed_tiers.empty() && !spec.allowed_tiers.count(node.spec.tier))
        return "constraint";
    if (!spec.allowed_zones.empty() && !spec.allowed_zones.count(node.spec.zone()))
        return "constraint";
    if (spec.cpu_m > node.free_cpu() || spec.mem_mib > node.free_mem() ||
        spec.storage_gib > node.free_storage())
        return "capacity-exceeded";
    if (spec.data_source && !resolve_data_source(*spec.data_source, node_id, routing))
        return "unreachable";
    if (!routing.latency(*job.node, node_id)) return "unreachable";
    return std::nullopt;
}

void TwinState::migrate_job(const std::string& job_id, const std::string& node_id,
                            const std::string& actor) {
    Routing routing(*this);
    if (auto reason = check_migrate(job_id, node_id, routing)) throw Error(*reason, job_id);

    JobState& job = jobs_.at(job_id);
    const std::string old_node = *job.node;
    allocate(nodes_.at(old_node), job.spec, -1);
    allocate(nodes_.at(node_id), job.spec, +1);
    job.node = node_id;
    job.placed_at = clock_;
    refresh_violation(job, routing);

    VirtualMs delay = *transfer_time(old_node, node_id, job.spec.data_size_mb);
    if (delay > 0) {
        job.phase = JobPhase::Transferring;
        job.transfer_ends = clock_ + delay;
    } else {
        job.phase = JobPhase::Running;
        job.transfer_ends = clock_;
    }
    log_.push_back({clock_, actor, "migrate", job_id, node_id, "applied", std::nullopt});
}

void TwinState::release_job(const std::string& job_id, JobPhase outcome,
                            const std::string& actor) {
    auto jit = jobs_.find(job_id);
    if (jit == jobs_.end()) throw Error("unknown-job", job_id);
    JobState& job = jit->second;
    if (!job.active()) throw Error("not-active", job_id);
    if (outcome != JobPhase::Completed && outcome != JobPhase::Failed)
        throw Error("invalid-value", "release outcome");

    allocate(nodes_.at(*job.node), job.spec, -1);
    job.phase = outcome;
    if (outcome == JobPhase::Completed) {
        job.remaining_work = 0;
        completed_ += 1;
        log_.push_back({clock_, actor, "complete", job_id, *job.node,
                        job.violation ? "violation" : "ok", std::nullopt});
    } else {
        failed_ += 1;
        log_.push_back({clock_, actor, "fail", job_id, *job.node,
                        job.violation ? "violation" : "ok", std::nullopt});
    }
    jobs_.erase(jit);
}

std::optional<VirtualMs> TwinState::path_latency(const std::string& a,
                                                 const std::string& b) const {
    if (!has_node(a)) throw Error("unknown-node", a);
    if (!has_node(b)) throw Error("unknown-node", b);
    Routing routing(*this);
    return routing.latency(a, b);
}

std::optional<VirtualMs> TwinState::transfer_time(const std::string& a, const std::string& b,
                                                  double size_mb) const {
    if (!has_node(a)) throw Error("unknown-node", a);
    if (!has_node(b)) throw Error("unknown-node", b);
    if (a == b) return 0;
    Routing routing(*this);
    auto lat = routing.latency(a, b);
    if (!lat) return std::nullopt;
    VirtualMs data = 0;
    if (size_mb > 0) {
        auto bw = routing.bottleneck(a, b);
        data = static_cast<VirtualMs>(std::ceil(size_mb * 8.0 * 1000.0 / *bw));
    }
    return *lat + data;
}

std::optional<std::string> TwinState::resolve_data_source(const std::string& source,
                                                          const std::string& node_id,
                                                          const Routing& routing) const {
    auto direct = nodes_.find(source);
    if (direct != nodes_.end()) {
        if (!direct->second.up) return std::nullopt;
        if (!routing.latency(node_id, source)) return std::nullopt;
        return source;
    }
    // Zone label: nearest up node carrying that zone, ties to lowest id.
    std::optional<std::string> best;
    VirtualMs best_lat = 0;
    for (const auto& [id, node] : nodes_) {
        if (!node.up || node.spec.zone() != source) continue;
        auto lat = routing.latency(node_id, id);
        if (!lat) continue;
        if (!best || *lat < best_lat) {
            best = id;
            best_lat = *lat;
        }
    }
    return best;
}

TwinState TwinState::scheduler_view() const {
    TwinState view = *this;
    view.log_.clear();
    return view;
}

void TwinState::restore_node_state(const std::string& id, bool up, double background_load) {
    NodeState& node = node_mut(id);
    node.up = up;
    node.background_load = background_load;
}

void TwinState::restore_job(JobState job) {
    if (job.active()) {
        if (!job.node) throw Error("invalid-value", "active job without node: " + job.spec.id);
        allocate(node_mut(*job.node), job.spec, +1);
    }
    seen_job_ids_.insert(job.spec.id);
    const std::string id = job.spec.id;
    jobs_.emplace(id, std::move(job));
}

void TwinState::restore_counters(std::int64_t arrivals, std::int64_t completed,
                                 std::int64_t failed) {
    arrivals_ = arrivals;
    completed_ = completed;
    failed_ = failed;
}

bool TwinState::capacity_invariant_holds() const {
    for (const auto& [id, node] : nodes_) {
        if (!node.up) continue;
        if (node.cpu_used > node.spec.cpu_m || node.mem_used > node.spec.mem_mib ||
            node.storage_used > node.spec.storage_gib)
            return false;
        std::int64_t cpu = 0, mem = 0, storage = 0;
        for (const auto& [jid, job] : jobs_) {
            if (job.active() && job.node && *job.node == id) {
                cpu += job.spec.cpu_m;
                mem += job.spec.mem_mib;
                storage += job.spec.storage_gib;
            }
        }
        if (cpu != node.cpu_used || mem != node.mem_used || storage != node.storage_used)
            return false;
    }
    return true;
}

} // namespace edgetwin
