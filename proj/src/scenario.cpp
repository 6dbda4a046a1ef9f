#include "edgetwin/scenario.hpp"

#include "edgetwin/rng.hpp"
#include "edgetwin/serialization.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace edgetwin::scenario {

namespace {

std::size_t line_of_offset(const std::string& text, std::size_t byte) {
    return 1 + static_cast<std::size_t>(
                   std::count(text.begin(), text.begin() + std::min(byte, text.size()), '\n'));
}

} // namespace

Scenario parse_scenario_unchecked(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::ostringstream msg;
        msg << "line " << line_of_offset(text, e.byte) << ": " << e.what();
        throw Error("syntax", msg.str());
    }
    require_keys(doc, {"name", "seed", "description", "topology", "events"}, {}, "$");

    Scenario s;
    s.name = get_string(doc, "name", "$");
    if (!doc.at("seed").is_number_unsigned() && !doc.at("seed").is_number_integer())
        throw Error("invalid-field", "$.seed: expected integer");
    s.seed = doc.at("seed").get<std::uint64_t>();
    s.description = get_string(doc, "description", "$");

    const Json& topology = doc.at("topology");
    require_keys(topology, {"nodes", "links"}, {}, "$.topology");
    if (!topology.at("nodes").is_array())
        throw Error("invalid-field", "$.topology.nodes: expected array");
    if (!topology.at("links").is_array())
        throw Error("invalid-field", "$.topology.links: expected array");
    std::size_t i = 0;
    for (const auto& n : topology.at("nodes")) {
        s.nodes.push_back(node_from_json(n, "$.topology.nodes[" + std::to_string(i++) + "]"));
    }
    i = 0;
    for (const auto& l : topology.at("links")) {
        s.links.push_back(link_from_json(l, "$.topology.links[" + std::to_string(i++) + "]"));
    }
    if (!doc.at("events").is_array())
        throw Error("invalid-field", "$.events: expected array");
    i = 0;
    for (const auto& e : doc.at("events")) {
        s.events.push_back(event_from_json(e, "$.events[" + std::to_string(i++) + "]"));
    }
    return s;
}

Scenario parse_scenario(const std::string& text) {
    Scenario s = parse_scenario_unchecked(text);
    auto issues = validate_scenario(s);
    if (!issues.empty())
        throw Error(issues.front().code, issues.front().path + ": " + issues.front().message);
    return s;
}

std::string serialize_scenario(const Scenario& s) {
    Json doc;
    doc["name"] = s.name;
    doc["seed"] = s.seed;
    doc["description"] = s.description;
    Json nodes = Json::array();
    for (const auto& n : s.nodes) nodes.push_back(node_to_json(n));
    Json links = Json::array();
    for (const auto& l : s.links) links.push_back(link_to_json(l));
    doc["topology"] = Json{{"nodes", std::move(nodes)}, {"links", std::move(links)}};
    Json events = Json::array();
    for (const auto& e : s.events) events.push_back(event_to_json(e));
    doc["events"] = std::move(events);
    return doc.dump(2) + "\n";
}

std::vector<Issue> validate_scenario(const Scenario& s) {
    std::vector<Issue> issues;
    auto add = [&issues](std::string code, std::string path, std::string message) {
        issues.push_back({std::move(code), std::move(path), std::move(message)});
    };

    std::set<std::string> node_ids;
    std::set<std::string> zones;
    for (std::size_t i = 0; i < s.nodes.size(); ++i) {
        const NodeSpec& n = s.nodes[i];
        const std::string path = "topology.nodes[" + std::to_string(i) + "]";
        if (!node_ids.insert(n.id).second) add("duplicate-node-id", path, n.id);
        if (n.cpu_m < 0 || n.mem_mib < 0 || n.storage_gib < 0)
            add("invalid-field", path, "negative capacity");
        if (n.power_idle_w < 0 || n.power_max_w < n.power_idle_w)
            add("invalid-field", path, "power_max_w must be >= power_idle_w >= 0");
        if (!n.zone().empty()) zones.insert(n.zone());
    }

    std::set<LinkKey> link_keys;
    for (std::size_t i = 0; i < s.links.size(); ++i) {
        const LinkSpec& l = s.links[i];
        const std::string path = "topology.links[" + std::to_string(i) + "]";
        if (!node_ids.count(l.a)) add("dangling-id", path, "unknown endpoint " + l.a);
        if (!node_ids.count(l.b)) add("dangling-id", path, "unknown endpoint " + l.b);
        if (l.a == l.b) add("invalid-field", path, "self-link");
        if (!link_keys.insert(link_key(l.a, l.b)).second)
            add("duplicate-link", path, l.a + "-" + l.b);
        if (l.latency_ms < 0) add("invalid-field", path, "negative latency");
        if (l.bandwidth_mbps <= 0) add("invalid-field", path, "bandwidth must be > 0");
    }

    std::set<std::string> job_ids;
    VirtualMs last_t = 0;
    for (std::size_t i = 0; i < s.events.size(); ++i) {
        const ScenarioEvent& e = s.events[i];
        const std::string path = "events[" + std::to_string(i) + "]";
        if (e.t < 0) add("invalid-field", path, "negative time");
        if (i > 0 && e.t < last_t)
            add("ordering-violation", path, "event time decreases");
        last_t = e.t;

        if (const auto* arrival = std::get_if<JobArrival>(&e.payload)) {
            const JobSpec& job = arrival->job;
            if (!job_ids.insert(job.id).second) add("duplicate-job-id", path, job.id);
            if (job.cpu_m < 0 || job.mem_mib < 0 || job.storage_gib < 0)
                add("invalid-field", path + ".job", "negative demand");
            if (job.duration_ms <= 0) add("invalid-field", path + ".job", "duration must be > 0");
            if (job.data_size_mb < 0) add("invalid-field", path + ".job", "negative data size");
            if (job.priority < 0) add("invalid-field", path + ".job", "negative priority");
            if (job.latency_bound_ms && !job.data_source)
                add("latency-bound-without-source", path + ".job", job.id);
            if (job.latency_bound_ms && *job.latency_bound_ms < 0)
                add("invalid-field", path + ".job", "negative latency bound");
            if (job.data_source && !node_ids.count(*job.data_source) &&
                !zones.count(*job.data_source))
                add("dangling-id", path + ".job.data_source", *job.data_source);
        } else if (const auto* fail = std::get_if<NodeFail>(&e.payload)) {
            if (!node_ids.count(fail->node)) add("dangling-id", path + ".node", fail->node);
        } else if (const auto* recover = std::get_if<NodeRecover>(&e.payload)) {
            if (!node_ids.count(recover->node)) add("dangling-id", path + ".node", recover->node);
        } else if (const auto* change = std::get_if<LinkChange>(&e.payload)) {
            if (!link_keys.count(link_key(change->a, change->b)))
                add("dangling-id", path, "no such link " + change->a + "-" + change->b);
            if (change->latency_ms < 0) add("invalid-field", path, "negative latency");
            if (change->bandwidth_mbps <= 0) add("invalid-field", path, "bandwidth must be > 0");
        } else if (const auto* metric = std::get_if<MetricUpdate>(&e.payload)) {
            if (!node_ids.count(metric->node)) add("dangling-id", path + ".node", metric->node);
            if (metric->background_load < 0.0 || metric->background_load > 1.0)
                add("invalid-field", path, "background_load outside [0,1]");
        }
    }
    return issues;
}

// --- synthetic generation ----------------------------------------------------

namespace {

NodeSpec make_node(std::string id, Tier tier, std::string zone) {
    NodeSpec n;
    n.id = std::move(id);
    n.tier = tier;
    switch (tier) {
    case Tier::Iot:
        n.cpu_m = 1000; n.mem_mib = 1024; n.storage_gib = 16;
        n.power_idle_w = 2; n.power_max_w = 5;
        break;
    case Tier::Edge:
        n.cpu_m = 4000; n.mem_mib = 8192; n.storage_gib = 256;
        n.power_idle_w = 20; n.power_max_w = 65;
        break;
    case Tier::Cloud:
        n.cpu_m = 16000; n.mem_mib = 65536; n.storage_gib = 2000;
        n.power_idle_w = 100; n.power_max_w = 320;
        break;
    case Tier::Hpc:
        n.cpu_m = 64000; n.mem_mib = 262144; n.storage_gib = 10000;
        n.power_idle_w = 400; n.power_max_w = 1300;
        break;
    }
    n.labels["zone"] = std::move(zone);
    return n;
}

std::int64_t draw(Rng& rng, const IntRange& range) {
    return rng.uniform_int(range.min, range.max);
}

void check_range(const IntRange& r, const char* what) {
    if (r.min > r.max) throw Error("invalid-params", std::string(what) + ": min > max");
    if (r.min < 0) throw Error("invalid-params", std::string(what) + ": negative");
}

} // namespace

Scenario generate_synthetic(const SynthesisParams& p, std::uint64_t seed) {
    if (p.n_iot < 0 || p.n_edge < 0 || p.n_cloud < 0 || p.n_hpc < 0 || p.job_count < 0)
        throw Error("invalid-params", "counts must be >= 0");
    if (p.arrival_rate_per_s < 0 || p.failure_rate_per_h < 0)
        throw Error("invalid-params", "rates must be >= 0");
    if (p.latency_bound_prob < 0 || p.latency_bound_prob > 1)
        throw Error("invalid-params", "latency_bound_prob outside [0,1]");
    if (p.horizon_ms < 0) throw Error("invalid-params", "horizon must be >= 0");
    check_range(p.cpu_m, "cpu_m");
    check_range(p.mem_mib, "mem_mib");
    check_range(p.storage_gib, "storage_gib");
    check_range(p.duration_ms, "duration_ms");
    check_range(p.data_size_mb, "data_size_mb");
    check_range(p.latency_bound_ms, "latency_bound_ms");
    if (p.duration_ms.min <= 0) throw Error("invalid-params", "duration_ms.min must be > 0");

    Scenario s;
    s.name = p.name;
    s.seed = seed;
    s.description = p.description;

    // Tiered chain: iot nodes hang off edges round-robin, edges connect to
    // every cloud, clouds to every hpc node.
    std::vector<std::string> iot, edge, cloud, hpc;
    for (int i = 0; i < p.n_edge; ++i) {
        std::string id = "edge-" + std::to_string(i + 1);
        s.nodes.push_back(make_node(id, Tier::Edge, "site-" + std::to_string(i + 1)));
        edge.push_back(id);
    }
    for (int i = 0; i < p.n_iot; ++i) {
        std::string id = "iot-" + std::to_string(i + 1);
        std::string zone = edge.empty() ? "site-0" : "site-" + std::to_string(i % p.n_edge + 1);
        s.nodes.push_back(make_node(id, Tier::Iot, zone));
        iot.push_back(id);
    }
    for (int i = 0; i < p.n_cloud; ++i) {
        std::string id = "cloud-" + std::to_string(i + 1);
        s.nodes.push_back(make_node(id, Tier::Cloud, "core"));
        cloud.push_back(id);
    }
    for (int i = 0; i < p.n_hpc; ++i) {
        std::string id = "hpc-" + std::to_string(i + 1);
        s.nodes.push_back(make_node(id, Tier::Hpc, "core"));
        hpc.push_back(id);
    }
    auto link = [&s](const std::string& a, const std::string& b, VirtualMs lat, double bw) {
        s.links.push_back({a, b, lat, bw, true});
    };
    for (std::size_t i = 0; i < iot.size(); ++i) {
        if (!edge.empty()) link(iot[i], edge[i % edge.size()], 2, 100);
    }
    for (const auto& e : edge)
        for (const auto& c : cloud) link(e, c, 20, 1000);
    for (const auto& c : cloud)
        for (const auto& h : hpc) link(c, h, 5, 10000);
    // Edge-to-edge ring keeps sites connected when a cloud node fails.
    for (std::size_t i = 0; i + 1 < edge.size(); ++i) link(edge[i], edge[i + 1], 4, 500);

    std::vector<std::string> sources = iot.empty() ? edge : iot;

    // Arrivals: Poisson inter-arrival times via inverse CDF.
    std::vector<ScenarioEvent> arrivals;
    if (p.job_count > 0 && p.arrival_rate_per_s > 0 && !s.nodes.empty()) {
        Rng arrival_rng(derive_seed(seed, "arrivals"));
        VirtualMs t = 0;
        for (int k = 0; k < p.job_count; ++k) {
            t += std::max<VirtualMs>(
                1, static_cast<VirtualMs>(
                       std::ceil(arrival_rng.exponential(p.arrival_rate_per_s) * 1000.0)));
            if (t > p.horizon_ms) break;
            Rng job_rng(derive_seed(seed, "job", static_cast<std::uint64_t>(k)));
            JobSpec job;
            job.id = "j" + std::to_string(k + 1);
            job.arrival_ms = t;
            job.cpu_m = draw(job_rng, p.cpu_m);
            job.mem_mib = draw(job_rng, p.mem_mib);
            job.storage_gib = draw(job_rng, p.storage_gib);
            job.duration_ms = draw(job_rng, p.duration_ms);
            job.data_size_mb = static_cast<double>(draw(job_rng, p.data_size_mb));
            const bool bounded = job_rng.uniform01() < p.latency_bound_prob;
            if ((bounded || job.data_size_mb > 0) && !sources.empty()) {
                job.data_source =
                    sources[static_cast<std::size_t>(job_rng.uniform_int(
                        0, static_cast<std::int64_t>(sources.size()) - 1))];
                if (bounded) job.latency_bound_ms = draw(job_rng, p.latency_bound_ms);
            }
            if (job_rng.uniform01() < 0.1) job.allowed_tiers = {Tier::Edge, Tier::Cloud};
            job.priority = static_cast<int>(job_rng.uniform_int(0, 2));
            job.migratable = job_rng.uniform01() < 0.9;
            arrivals.push_back({t, JobArrival{std::move(job)}});
        }
    }

    // Failures: fail/recover pairs, Poisson over the horizon.
    std::vector<ScenarioEvent> churn;
    if (p.failure_rate_per_h > 0 && !s.nodes.empty()) {
        Rng fail_rng(derive_seed(seed, "failures"));
        const double rate_per_ms = p.failure_rate_per_h / 3'600'000.0;
        VirtualMs t = 0;
        while (true) {
            t += std::max<VirtualMs>(
                1, static_cast<VirtualMs>(std::ceil(fail_rng.exponential(rate_per_ms))));
            if (t > p.horizon_ms) break;
            const auto& victim =
                s.nodes[static_cast<std::size_t>(
                            fail_rng.uniform_int(0, static_cast<std::int64_t>(s.nodes.size()) - 1))]
                    .id;
            churn.push_back({t, NodeFail{victim}});
            VirtualMs recover_at = t + fail_rng.uniform_int(30'000, 120'000);
            if (recover_at <= p.horizon_ms) churn.push_back({recover_at, NodeRecover{victim}});
        }
    }

    // Recover events may interleave past later failures; a stable sort by time
    // keeps same-time ordering deterministic (arrivals before churn).
    s.events.reserve(arrivals.size() + churn.size());
    s.events.insert(s.events.end(), arrivals.begin(), arrivals.end());
    s.events.insert(s.events.end(), churn.begin(), churn.end());
    std::stable_sort(s.events.begin(), s.events.end(),
                     [](const ScenarioEvent& a, const ScenarioEvent& b) { return a.t < b.t; });
    return s;
}

} // namespace edgetwin::scenario
