#pragma once

#include "edgetwin/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace edgetwin::scenario {

/// A deterministic, seeded timeline of topology plus events.
struct Scenario {
    std::string name;
    std::uint64_t seed = 0;
    std::string description;
    std::vector<NodeSpec> nodes;
    std::vector<LinkSpec> links;
    std::vector<ScenarioEvent> events;

    bool operator==(const Scenario&) const = default;
};

struct Issue {
    std::string code;    // machine-readable, e.g. "duplicate-job-id"
    std::string path;    // e.g. "events[3].job"
    std::string message;

    bool operator==(const Issue&) const = default;
};

/// Parse and validate a scenario document. Parsing is strict: unknown fields
/// are rejected. Throws Error with codes "syntax" (message carries the line),
/// "unknown-field", "missing-field", "invalid-field", or the first
/// validation issue's code.
Scenario parse_scenario(const std::string& text);

/// Structural parse only (still strict about fields); invariants are not
/// checked. Callers wanting the full issue list pair this with
/// validate_scenario.
Scenario parse_scenario_unchecked(const std::string& text);

/// Canonical document serialization; parse(serialize(s)) == s.
std::string serialize_scenario(const Scenario& s);

/// All invariant violations; empty iff the scenario is well-formed.
std::vector<Issue> validate_scenario(const Scenario& s);

struct IntRange {
    std::int64_t min = 0;
    std::int64_t max = 0;
};

/// Parameters for synthetic scenario generation.
struct SynthesisParams {
    std::string name = "synthetic";
    std::string description = "synthetic tiered-continuum scenario";
    int n_iot = 2;
    int n_edge = 2;
    int n_cloud = 2;
    int n_hpc = 1;
    int job_count = 20;
    double arrival_rate_per_s = 1.0;         // Poisson arrival rate
    IntRange cpu_m{100, 2000};
    IntRange mem_mib{64, 2048};
    IntRange storage_gib{0, 8};
    IntRange duration_ms{1000, 60000};
    IntRange data_size_mb{0, 200};
    double latency_bound_prob = 0.3;
    IntRange latency_bound_ms{20, 200};
    double failure_rate_per_h = 0.0;          // node fail/recover pairs
    VirtualMs horizon_ms = 600000;
};

/// Deterministic function of (params, seed). Topology is a tiered chain
/// (iot-edge, edge-cloud, cloud-hpc); arrivals are Poisson via inverse CDF on
/// per-class split streams. Output always passes validate_scenario.
Scenario generate_synthetic(const SynthesisParams& params, std::uint64_t seed);

/// Embedded use-case fixtures: "intersection", "mri", "emergency".
Scenario load_fixture(const std::string& name);

const std::vector<std::string>& fixture_names();

} // namespace edgetwin::scenario
