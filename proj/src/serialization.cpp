#include "edgetwin/serialization.hpp"

#include <algorithm>

namespace edgetwin {

void require_keys(const Json& j, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional, const std::string& path) {
    if (!j.is_object()) throw Error("invalid-field", path + ": expected object");
    for (const char* key : required) {
        if (!j.contains(key))
            throw Error("missing-field", path + ": missing '" + key + "'");
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        auto match = [&key](const char* k) { return key == k; };
        if (!std::any_of(required.begin(), required.end(), match) &&
            !std::any_of(optional.begin(), optional.end(), match))
            throw Error("unknown-field", path + ": unknown field '" + key + "'");
    }
}

std::int64_t get_int(const Json& j, const char* key, const std::string& path) {
    const auto& v = j.at(key);
    if (!v.is_number_integer())
        throw Error("invalid-field", path + "." + key + ": expected integer");
    return v.get<std::int64_t>();
}

double get_number(const Json& j, const char* key, const std::string& path) {
    const auto& v = j.at(key);
    if (!v.is_number())
        throw Error("invalid-field", path + "." + key + ": expected number");
    return v.get<double>();
}

std::string get_string(const Json& j, const char* key, const std::string& path) {
    const auto& v = j.at(key);
    if (!v.is_string())
        throw Error("invalid-field", path + "." + key + ": expected string");
    return v.get<std::string>();
}

bool get_bool(const Json& j, const char* key, const std::string& path) {
    const auto& v = j.at(key);
    if (!v.is_boolean())
        throw Error("invalid-field", path + "." + key + ": expected boolean");
    return v.get<bool>();
}

Json node_to_json(const NodeSpec& spec) {
    Json j;
    j["id"] = spec.id;
    j["tier"] = to_string(spec.tier);
    j["cpu_m"] = spec.cpu_m;
    j["mem_mib"] = spec.mem_mib;
    j["storage_gib"] = spec.storage_gib;
    j["power_idle_w"] = spec.power_idle_w;
    j["power_max_w"] = spec.power_max_w;
    j["labels"] = spec.labels;
    return j;
}

NodeSpec node_from_json(const Json& j, const std::string& path) {
    require_keys(j,
                 {"id", "tier", "cpu_m", "mem_mib", "storage_gib", "power_idle_w", "power_max_w"},
                 {"labels"}, path);
    NodeSpec spec;
    spec.id = get_string(j, "id", path);
    spec.tier = tier_from_string(get_string(j, "tier", path));
    spec.cpu_m = get_int(j, "cpu_m", path);
    spec.mem_mib = get_int(j, "mem_mib", path);
    spec.storage_gib = get_int(j, "storage_gib", path);
    spec.power_idle_w = get_number(j, "power_idle_w", path);
    spec.power_max_w = get_number(j, "power_max_w", path);
    if (j.contains("labels")) {
        const auto& labels = j.at("labels");
        if (!labels.is_object()) throw Error("invalid-field", path + ".labels: expected object");
        for (auto it = labels.begin(); it != labels.end(); ++it) {
            if (!it.value().is_string())
                throw Error("invalid-field", path + ".labels: values must be strings");
            spec.labels[it.key()] = it.value().get<std::string>();
        }
    }
    return spec;
}

Json link_to_json(const LinkSpec& link) {
    Json j;
    j["a"] = link.a;
    j["b"] = link.b;
    j["latency_ms"] = link.latency_ms;
    j["bandwidth_mbps"] = link.bandwidth_mbps;
    j["up"] = link.up;
    return j;
}

LinkSpec link_from_json(const Json& j, const std::string& path) {
    require_keys(j, {"a", "b", "latency_ms", "bandwidth_mbps"}, {"up"}, path);
    LinkSpec link;
    link.a = get_string(j, "a", path);
    link.b = get_string(j, "b", path);
    link.latency_ms = get_int(j, "latency_ms", path);
    link.bandwidth_mbps = get_number(j, "bandwidth_mbps", path);
    link.up = j.contains("up") ? get_bool(j, "up", path) : true;
    return link;
}

Json job_to_json(const JobSpec& spec) {
    Json j;
    j["id"] = spec.id;
    j["cpu_m"] = spec.cpu_m;
    j["mem_mib"] = spec.mem_mib;
    j["storage_gib"] = spec.storage_gib;
    j["duration_ms"] = spec.duration_ms;
    if (spec.data_size_mb > 0) j["data_size_mb"] = spec.data_size_mb;
    if (spec.data_source) j["data_source"] = *spec.data_source;
    if (spec.latency_bound_ms) j["latency_bound_ms"] = *spec.latency_bound_ms;
    if (!spec.allowed_tiers.empty()) {
        Json tiers = Json::array();
        for (Tier t : spec.allowed_tiers) tiers.push_back(to_string(t));
        j["allowed_tiers"] = tiers;
    }
    if (!spec.allowed_zones.empty()) j["allowed_zones"] = spec.allowed_zones;
    if (spec.priority != 0) j["priority"] = spec.priority;
    if (!spec.migratable) j["migratable"] = false;
    return j;
}

JobSpec job_from_json(const Json& j, const std::string& path) {
    require_keys(j, {"id", "cpu_m", "mem_mib", "storage_gib", "duration_ms"},
                 {"data_size_mb", "data_source", "latency_bound_ms", "allowed_tiers",
                  "allowed_zones", "priority", "migratable"},
                 path);
    JobSpec spec;
    spec.id = get_string(j, "id", path);
    spec.cpu_m = get_int(j, "cpu_m", path);
    spec.mem_mib = get_int(j, "mem_mib", path);
    spec.storage_gib = get_int(j, "storage_gib", path);
    spec.duration_ms = get_int(j, "duration_ms", path);
    if (j.contains("data_size_mb")) spec.data_size_mb = get_number(j, "data_size_mb", path);
    if (j.contains("data_source")) spec.data_source = get_string(j, "data_source", path);
    if (j.contains("latency_bound_ms"))
        spec.latency_bound_ms = get_int(j, "latency_bound_ms", path);
    if (j.contains("allowed_tiers")) {
        const auto& tiers = j.at("allowed_tiers");
        if (!tiers.is_array())
            throw Error("invalid-field", path + ".allowed_tiers: expected array");
        for (const auto& t : tiers) spec.allowed_tiers.insert(tier_from_string(t.get<std::string>()));
    }
    if (j.contains("allowed_zones")) {
        const auto& zones = j.at("allowed_zones");
        if (!zones.is_array())
            throw Error("invalid-field", path + ".allowed_zones: expected array");
        for (const auto& z : zones) {
            if (!z.is_string())
                throw Error("invalid-field", path + ".allowed_zones: expected strings");
            spec.allowed_zones.insert(z.get<std::string>());
        }
    }
    if (j.contains("priority")) spec.priority = static_cast<int>(get_int(j, "priority", path));
    if (j.contains("migratable")) spec.migratable = get_bool(j, "migratable", path);
    return spec;
}

Json event_to_json(const ScenarioEvent& event) {
    Json j;
    j["t"] = event.t;
    j["kind"] = event.kind();
    if (const auto* arrival = std::get_if<JobArrival>(&event.payload)) {
        j["job"] = job_to_json(arrival->job);
    } else if (const auto* fail = std::get_if<NodeFail>(&event.payload)) {
        j["node"] = fail->node;
    } else if (const auto* recover = std::get_if<NodeRecover>(&event.payload)) {
        j["node"] = recover->node;
    } else if (const auto* change = std::get_if<LinkChange>(&event.payload)) {
        j["a"] = change->a;
        j["b"] = change->b;
        j["latency_ms"] = change->latency_ms;
        j["bandwidth_mbps"] = change->bandwidth_mbps;
        j["up"] = change->up;
    } else if (const auto* metric = std::get_if<MetricUpdate>(&event.payload)) {
        j["node"] = metric->node;
        j["background_load"] = metric->background_load;
    }
    return j;
}

ScenarioEvent event_from_json(const Json& j, const std::string& path) {
    if (!j.is_object() || !j.contains("kind") || !j.contains("t"))
        throw Error("missing-field", path + ": event needs 't' and 'kind'");
    ScenarioEvent event;
    event.t = get_int(j, "t", path);
    const std::string kind = get_string(j, "kind", path);
    if (kind == "job_arrival") {
        require_keys(j, {"t", "kind", "job"}, {}, path);
        JobArrival arrival;
        arrival.job = job_from_json(j.at("job"), path + ".job");
        arrival.job.arrival_ms = event.t;
        event.payload = std::move(arrival);
    } else if (kind == "node_fail") {
        require_keys(j, {"t", "kind", "node"}, {}, path);
        event.payload = NodeFail{get_string(j, "node", path)};
    } else if (kind == "node_recover") {
        require_keys(j, {"t", "kind", "node"}, {}, path);
        event.payload = NodeRecover{get_string(j, "node", path)};
    } else if (kind == "link_change") {
        require_keys(j, {"t", "kind", "a", "b", "latency_ms", "bandwidth_mbps", "up"}, {}, path);
        event.payload = LinkChange{get_string(j, "a", path), get_string(j, "b", path),
                                   get_int(j, "latency_ms", path),
                                   get_number(j, "bandwidth_mbps", path), get_bool(j, "up", path)};
    } else if (kind == "metric_update") {
        require_keys(j, {"t", "kind", "node", "background_load"}, {}, path);
        event.payload = MetricUpdate{get_string(j, "node", path),
                                     get_number(j, "background_load", path)};
    } else {
        throw Error("invalid-field", path + ": unknown event kind '" + kind + "'");
    }
    return event;
}

std::string event_to_line(const ScenarioEvent& event) { return event_to_json(event).dump(); }

Json decision_to_json(const Decision& decision) {
    Json j;
    j["kind"] = to_string(decision.kind);
    switch (decision.kind) {
    case DecisionKind::Place:
    case DecisionKind::Migrate:
        j["job"] = decision.job;
        j["node"] = decision.node;
        break;
    case DecisionKind::Delay:
        j["job"] = decision.job;
        break;
    case DecisionKind::NoOp:
        break;
    }
    return j;
}

Decision decision_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("kind")) throw Error("malformed", "decision needs 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "place") return Decision::place(j.at("job").get<std::string>(),
                                                j.at("node").get<std::string>());
    if (kind == "delay") return Decision::delay(j.at("job").get<std::string>());
    if (kind == "migrate") return Decision::migrate(j.at("job").get<std::string>(),
                                                    j.at("node").get<std::string>());
    if (kind == "no_op") return Decision::no_op();
    throw Error("malformed", "unknown decision kind '" + kind + "'");
}

Json log_entry_to_json(const LogEntry& entry) {
    Json j;
    j["t"] = entry.t;
    j["actor"] = entry.actor;
    j["action"] = entry.action;
    j["job"] = entry.job;
    j["node"] = entry.node;
    j["outcome"] = entry.outcome;
    return j;
}

Json twin_to_json(const TwinState& state) {
    Json j;
    j["clock"] = state.clock();
    Json nodes = Json::array();
    for (const auto& [id, node] : state.nodes()) {
        Json n = node_to_json(node.spec);
        n["up"] = node.up;
        n["background_load"] = node.background_load;
        nodes.push_back(std::move(n));
    }
    j["nodes"] = std::move(nodes);
    Json links = Json::array();
    for (const auto& [key, link] : state.links()) links.push_back(link_to_json(link));
    j["links"] = std::move(links);
    Json jobs = Json::array();
    for (const auto& [id, job] : state.jobs()) {
        Json spec = job_to_json(job.spec);
        spec["arrival_ms"] = job.spec.arrival_ms;
        Json item;
        item["spec"] = std::move(spec);
        item["phase"] = to_string(job.phase);
        if (job.node) item["node"] = *job.node;
        item["placed_at"] = job.placed_at;
        item["transfer_ends"] = job.transfer_ends;
        item["remaining_work"] = job.remaining_work;
        item["restarts"] = job.restarts;
        item["violation"] = job.violation;
        jobs.push_back(std::move(item));
    }
    j["jobs"] = std::move(jobs);
    j["arrivals"] = state.arrivals();
    j["completed"] = state.completed();
    j["failed"] = state.failed();
    return j;
}

TwinState twin_from_json(const Json& j) {
    std::vector<NodeSpec> specs;
    std::vector<std::pair<bool, double>> runtime;
    for (const auto& n : j.at("nodes")) {
        Json spec = n;
        spec.erase("up");
        spec.erase("background_load");
        specs.push_back(node_from_json(spec, "nodes"));
        runtime.emplace_back(n.value("up", true), n.value("background_load", 0.0));
    }
    std::vector<LinkSpec> links;
    for (const auto& l : j.at("links")) links.push_back(link_from_json(l, "links"));
    TwinState state(specs, links);

    state.restore_clock(j.at("clock").get<VirtualMs>());
    for (std::size_t i = 0; i < specs.size(); ++i)
        state.restore_node_state(specs[i].id, runtime[i].first, runtime[i].second);
    for (const auto& item : j.at("jobs")) {
        Json spec_json = item.at("spec");
        const VirtualMs arrival = spec_json.at("arrival_ms").get<VirtualMs>();
        spec_json.erase("arrival_ms");
        JobState job;
        job.spec = job_from_json(spec_json, "jobs");
        job.spec.arrival_ms = arrival;
        const std::string phase = item.at("phase").get<std::string>();
        for (JobPhase p : {JobPhase::Queued, JobPhase::Transferring, JobPhase::Running}) {
            if (phase == to_string(p)) job.phase = p;
        }
        if (item.contains("node")) job.node = item.at("node").get<std::string>();
        job.placed_at = item.at("placed_at").get<VirtualMs>();
        job.transfer_ends = item.at("transfer_ends").get<VirtualMs>();
        job.remaining_work = item.at("remaining_work").get<VirtualMs>();
        job.restarts = item.at("restarts").get<int>();
        job.violation = item.at("violation").get<bool>();
        state.restore_job(std::move(job));
    }
    state.restore_counters(j.at("arrivals").get<std::int64_t>(),
                           j.at("completed").get<std::int64_t>(),
                           j.at("failed").get<std::int64_t>());
    return state;
}

} // namespace edgetwin
