#include "edgetwin/scenario.hpp"

#include "edgetwin/types.hpp"

#include <algorithm>

namespace edgetwin::scenario {

namespace {

NodeSpec node(std::string id, Tier tier, std::int64_t cpu_m, std::int64_t mem_mib,
              std::int64_t storage_gib, double idle_w, double max_w, std::string zone) {
    NodeSpec n;
    n.id = std::move(id);
    n.tier = tier;
    n.cpu_m = cpu_m;
    n.mem_mib = mem_mib;
    n.storage_gib = storage_gib;
    n.power_idle_w = idle_w;
    n.power_max_w = max_w;
    n.labels["zone"] = std::move(zone);
    return n;
}

// Periodic camera streams with a tight end-to-end latency bound. The regional
// cloud sits behind a 120 ms uplink, so placements there violate the bound;
// the two edge boxes next to the cameras are the only compliant hosts.
Scenario build_intersection() {
    Scenario s;
    s.name = "intersection";
    s.seed = 101;
    s.description =
        "Vision jobs from two intersection cameras, one frame batch every 2 s per "
        "camera for one hour. Jobs carry a 100 ms latency bound to their camera; "
        "edge placement meets it, the regional cloud (122 ms away) does not.";
    s.nodes = {
        node("cam-north", Tier::Iot, 250, 512, 8, 3, 6, "intersection"),
        node("cam-south", Tier::Iot, 250, 512, 8, 3, 6, "intersection"),
        node("edge-north", Tier::Edge, 4000, 8192, 128, 25, 80, "intersection"),
        node("edge-south", Tier::Edge, 4000, 8192, 128, 25, 80, "intersection"),
        node("cloud-regional", Tier::Cloud, 16000, 65536, 2000, 120, 350, "region"),
    };
    s.links = {
        {"cam-north", "edge-north", 2, 1000, true},
        {"cam-south", "edge-south", 2, 1000, true},
        {"cam-north", "edge-south", 4, 1000, true},
        {"cam-south", "edge-north", 4, 1000, true},
        {"edge-north", "edge-south", 1, 10000, true},
        {"edge-north", "cloud-regional", 120, 10000, true},
        {"edge-south", "cloud-regional", 120, 10000, true},
    };
    int k = 0;
    for (VirtualMs t = 1000; t < 3'600'000; t += 2000) {
        const bool north = (k % 2) == 0;
        JobSpec job;
        job.id = "frame-" + std::to_string(++k);
        job.arrival_ms = t;
        job.cpu_m = 500;
        job.mem_mib = 512;
        job.storage_gib = 0;
        job.duration_ms = 800;
        job.data_size_mb = 5;
        job.data_source = north ? "cam-north" : "cam-south";
        job.latency_bound_ms = 100;
        s.events.push_back({t, JobArrival{std::move(job)}});
    }
    // Diurnal-ish background load on the shared cloud node.
    s.events.push_back({600'000, MetricUpdate{"cloud-regional", 0.3}});
    s.events.push_back({1'800'000, MetricUpdate{"cloud-regional", 0.6}});
    s.events.push_back({3'000'000, MetricUpdate{"cloud-regional", 0.2}});
    std::stable_sort(s.events.begin(), s.events.end(),
                     [](const ScenarioEvent& a, const ScenarioEvent& b) { return a.t < b.t; });
    return s;
}

// Large scans that must stay inside the hospital zone: the only host with
// enough capacity is the hospital server (two concurrent analyses), so the
// queue backs up while offsite capacity sits idle, excluded by access rules.
Scenario build_mri() {
    Scenario s;
    s.name = "mri";
    s.seed = 202;
    s.description =
        "Twelve 2000 MB scan analyses arriving one per minute, restricted to the "
        "hospital zone. The hospital server fits two concurrent jobs; offsite "
        "cloud and HPC capacity is excluded by the zone constraint.";
    s.nodes = {
        node("cloud-dc", Tier::Cloud, 16000, 65536, 2000, 110, 340, "offsite"),
        node("hospital-server", Tier::Edge, 8000, 32768, 500, 45, 150, "hospital"),
        node("hpc-center", Tier::Hpc, 64000, 262144, 10000, 450, 1400, "offsite"),
        node("mri-scanner-1", Tier::Edge, 2000, 4096, 100, 15, 40, "hospital"),
        node("mri-scanner-2", Tier::Edge, 2000, 4096, 100, 15, 40, "hospital"),
    };
    s.links = {
        {"mri-scanner-1", "hospital-server", 1, 1000, true},
        {"mri-scanner-2", "hospital-server", 1, 1000, true},
        {"hospital-server", "cloud-dc", 25, 10000, true},
        {"cloud-dc", "hpc-center", 8, 40000, true},
    };
    for (int k = 1; k <= 12; ++k) {
        JobSpec job;
        job.id = "scan-" + std::to_string(k);
        job.arrival_ms = 60'000 * k;
        job.cpu_m = 4000;
        job.mem_mib = 16384;
        job.storage_gib = 50;
        job.duration_ms = 240'000;
        job.data_size_mb = 2000;
        job.data_source = (k % 2) ? "mri-scanner-1" : "mri-scanner-2";
        job.allowed_zones = {"hospital"};
        job.migratable = (k % 2) == 0;
        s.events.push_back({job.arrival_ms, JobArrival{std::move(job)}});
    }
    return s;
}

// Field operations under infrastructure churn: the gateway and drones fail
// and recover, the backhaul link degrades mid-run, background load shifts.
Scenario build_emergency() {
    Scenario s;
    s.name = "emergency";
    s.seed = 303;
    s.description =
        "Recon image jobs from three drones every 30 s for 20 minutes while the "
        "field gateway and drones fail and recover and the backhaul degrades.";
    s.nodes = {
        node("cloud-hq", Tier::Cloud, 16000, 65536, 2000, 110, 340, "hq"),
        node("drone-1", Tier::Iot, 1000, 1024, 8, 4, 12, "field"),
        node("drone-2", Tier::Iot, 1000, 1024, 8, 4, 12, "field"),
        node("drone-3", Tier::Iot, 1000, 1024, 8, 4, 12, "field"),
        node("field-gateway", Tier::Edge, 4000, 8192, 128, 22, 70, "field"),
        node("ops-center", Tier::Edge, 8000, 16384, 256, 40, 130, "ops"),
    };
    s.links = {
        {"drone-1", "field-gateway", 10, 50, true},
        {"drone-2", "field-gateway", 10, 50, true},
        {"drone-3", "field-gateway", 10, 50, true},
        {"field-gateway", "ops-center", 30, 100, true},
        {"ops-center", "cloud-hq", 50, 500, true},
    };
    for (int k = 0; k < 40; ++k) {
        const VirtualMs t = 30'000 * (k + 1);
        JobSpec job;
        job.id = "recon-" + std::to_string(k + 1);
        job.arrival_ms = t;
        job.cpu_m = 800;
        job.mem_mib = 1024;
        job.storage_gib = 2;
        job.duration_ms = 15'000;
        job.data_size_mb = 20;
        job.data_source = "drone-" + std::to_string(k % 3 + 1);
        if (k % 2 == 0) job.latency_bound_ms = 250;
        job.priority = k % 3;
        s.events.push_back({t, JobArrival{std::move(job)}});
    }
    std::vector<ScenarioEvent> churn = {
        {300'000, NodeFail{"field-gateway"}},
        {420'000, NodeRecover{"field-gateway"}},
        {480'000, NodeFail{"drone-2"}},
        {540'000, NodeRecover{"drone-2"}},
        {600'000, LinkChange{"field-gateway", "ops-center", 300, 10, true}},
        {700'000, MetricUpdate{"ops-center", 0.5}},
        {900'000, LinkChange{"field-gateway", "ops-center", 30, 100, true}},
        {1'000'000, NodeFail{"field-gateway"}},
        {1'000'000, MetricUpdate{"ops-center", 0.1}},
        {1'080'000, NodeRecover{"field-gateway"}},
    };
    s.events.insert(s.events.end(), churn.begin(), churn.end());
    std::stable_sort(s.events.begin(), s.events.end(),
                     [](const ScenarioEvent& a, const ScenarioEvent& b) { return a.t < b.t; });
    return s;
}

} // namespace

const std::vector<std::string>& fixture_names() {
    static const std::vector<std::string> names = {"intersection", "mri", "emergency"};
    return names;
}

Scenario load_fixture(const std::string& name) {
    if (name == "intersection") {
        static const Scenario s = build_intersection();
        return s;
    }
    if (name == "mri") {
        static const Scenario s = build_mri();
        return s;
    }
    if (name == "emergency") {
        static const Scenario s = build_emergency();
        return s;
    }
    throw Error("unknown-fixture", name);
}

} // namespace edgetwin::scenario
