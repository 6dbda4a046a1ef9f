#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "edgetwin/engine.hpp"
#include "edgetwin/scenario.hpp"
#include "edgetwin/scheduler.hpp"
#include "edgetwin/serialization.hpp"

#include "oracles.hpp"

#include <functional>

using namespace edgetwin;
using namespace edgetwin::engine;

namespace {

NodeSpec make_node(const std::string& id, std::int64_t cpu = 1000, double idle = 10,
                   double max = 30) {
    NodeSpec n;
    n.id = id;
    n.tier = Tier::Edge;
    n.cpu_m = cpu;
    n.mem_mib = 8192;
    n.storage_gib = 100;
    n.power_idle_w = idle;
    n.power_max_w = max;
    return n;
}

JobSpec make_job(const std::string& id, std::int64_t cpu = 1000, VirtualMs duration = 10000) {
    JobSpec j;
    j.id = id;
    j.cpu_m = cpu;
    j.mem_mib = 0;
    j.storage_gib = 0;
    j.duration_ms = duration;
    return j;
}

scenario::Scenario one_job_scenario() {
    scenario::Scenario s;
    s.name = "one-job";
    s.description = "single job on a single adequate node";
    s.nodes = {make_node("n1", 1000, 10, 30)};
    s.events = {{0, JobArrival{make_job("j1", 1000, 10000)}}};
    return s;
}

/// Emits scripted decisions whenever the snapshot clock passes their time.
class ScriptedScheduler final : public sched::Scheduler {
public:
    explicit ScriptedScheduler(std::vector<std::pair<VirtualMs, Decision>> script)
        : script_(std::move(script)) {}
    std::string name() const override { return "scripted"; }
    std::vector<Decision> decide(const TwinState& snapshot) override {
        std::vector<Decision> out;
        while (next_ < script_.size() && script_[next_].first <= snapshot.clock()) {
            out.push_back(script_[next_].second);
            ++next_;
        }
        return out;
    }

private:
    std::vector<std::pair<VirtualMs, Decision>> script_;
    std::size_t next_ = 0;
};

} // namespace

TEST_CASE("empty scenario yields an all-zero report") {
    scenario::Scenario s;
    s.name = "empty";
    sched::FirstFitScheduler ff;
    auto result = run(s, ff, {});
    CHECK(result.report.jobs_arrived == 0);
    CHECK(result.report.jobs_completed == 0);
    CHECK(result.report.makespan_ms == 0);
    CHECK(result.report.energy_wh == 0.0);
    CHECK(result.state.clock() == 0);
}

TEST_CASE("single job lifecycle: response, energy, makespan") {
    sched::FirstFitScheduler ff;
    auto result = run(one_job_scenario(), ff, {});
    CHECK(result.report.jobs_arrived == 1);
    CHECK(result.report.jobs_completed == 1);
    CHECK(result.report.jobs_failed == 0);
    CHECK(result.report.mean_response_ms == doctest::Approx(10000.0));
    CHECK(result.report.p95_response_ms == doctest::Approx(10000.0));
    CHECK(result.report.makespan_ms == 10000);
    // cpu fully allocated for 10 s at 30 W: 300 J = 1/12 Wh.
    CHECK(result.report.energy_wh == doctest::Approx(30.0 * 10.0 / 3600.0).epsilon(1e-12));
    CHECK(result.report.mean_cpu_utilization == doctest::Approx(1.0));
}

TEST_CASE("runs are deterministic: byte-identical logs and reports") {
    for (const char* name : {"intersection", "mri", "emergency"}) {
        auto s = scenario::load_fixture(name);
        sched::WeightedScheduler a, b;
        auto r1 = run(s, a, {});
        auto r2 = run(s, b, {});
        CHECK(decision_log_text(r1.state) == decision_log_text(r2.state));
        CHECK(kpi_report_text(r1.report) == kpi_report_text(r2.report));
    }
}

TEST_CASE("step rejects a place when the node filled up earlier in the batch") {
    TwinState state({make_node("n1", 1000)}, {});
    state.apply_event({0, JobArrival{make_job("a", 800)}});
    state.apply_event({0, JobArrival{make_job("b", 800)}});
    ScriptedScheduler scripted({{0, Decision::place("a", "n1")}, {0, Decision::place("b", "n1")}});
    auto applied = step(state, scripted, {});
    CHECK(applied.size() == 1);
    auto report = compute_kpis(state.log(), state.node_specs());
    CHECK(report.decision_faults == 1);
    const auto& last = state.log().back();
    CHECK(last.outcome == "rejected:capacity-exceeded");
}

TEST_CASE("step rejects migrating a non-migratable or unknown job") {
    TwinState state({make_node("n1"), make_node("n2")},
                    {{"n1", "n2", 3, 1000, true}});
    JobSpec pinned = make_job("p", 500);
    pinned.migratable = false;
    state.apply_event({0, JobArrival{pinned}});
    state.place_job("p", "n1");
    ScriptedScheduler scripted(
        {{0, Decision::migrate("p", "n2")}, {0, Decision::migrate("ghost", "n2")}});
    auto applied = step(state, scripted, {});
    CHECK(applied.empty());
    auto report = compute_kpis(state.log(), state.node_specs());
    CHECK(report.decision_faults == 2);
}

TEST_CASE("valid migrate keeps remaining work and adds the transfer delay") {
    scenario::Scenario s;
    s.name = "migrate";
    s.nodes = {make_node("n1"), make_node("n2")};
    s.links = {{"n1", "n2", 3, 1000, true}};
    s.events = {{0, JobArrival{make_job("j", 500, 10000)}}};

    ScriptedScheduler scripted(
        {{0, Decision::place("j", "n1")}, {4000, Decision::migrate("j", "n2")}});
    EngineConfig config;
    config.reschedule_interval_ms = 4000; // decision points at 4000, 8000, ...
    auto result = run(s, scripted, config);
    CHECK(result.report.migrations == 1);
    CHECK(result.report.jobs_completed == 1);
    // 4000 ms of work done, migration transfer 3 ms, 6000 ms left: 10003.
    CHECK(result.report.makespan_ms == 10003);
    CHECK(result.report.mean_response_ms == doctest::Approx(10003.0));
    CHECK(result.report.restarts == 0);
}

TEST_CASE("duplicate decisions for one job are rejected") {
    TwinState state({make_node("n1", 4000), make_node("n2", 4000)}, {});
    state.apply_event({0, JobArrival{make_job("a", 500)}});
    ScriptedScheduler scripted({{0, Decision::place("a", "n1")}, {0, Decision::place("a", "n2")}});
    step(state, scripted, {});
    CHECK(state.log().back().outcome == "rejected:duplicate-decision");
}

TEST_CASE("strict latency mode rejects violating placements") {
    scenario::Scenario s;
    s.name = "strict";
    s.nodes = {make_node("far"), make_node("src", 100)};
    s.links = {{"far", "src", 90, 1000, true}};
    JobSpec j = make_job("j", 500, 1000);
    j.data_source = "src";
    j.latency_bound_ms = 50;
    s.events = {{0, JobArrival{j}}};

    sched::FirstFitScheduler ff;
    EngineConfig lenient;
    auto r1 = run(s, ff, lenient);
    CHECK(r1.report.jobs_completed == 1);
    CHECK(r1.report.latency_violation_count == 1);

    EngineConfig strict;
    strict.strict_latency = true;
    auto r2 = run(s, ff, strict);
    CHECK(r2.report.jobs_completed == 0);
    CHECK(r2.report.latency_violation_count == 0);
    CHECK(r2.report.decision_faults > 0);
}

TEST_CASE("compute_kpis on an empty log is all zeros") {
    auto report = compute_kpis({}, {make_node("n1")});
    CHECK(report == KPIReport{});
}

TEST_CASE("two completions at 10 s and 20 s average to 15 s") {
    scenario::Scenario s;
    s.name = "pair";
    s.nodes = {make_node("n1", 2000)};
    s.events = {{0, JobArrival{make_job("a", 1000, 10000)}},
                {0, JobArrival{make_job("b", 1000, 20000)}}};
    sched::FirstFitScheduler ff;
    auto result = run(s, ff, {});
    CHECK(result.report.jobs_completed == 2);
    CHECK(result.report.mean_response_ms == doctest::Approx(15000.0));
    CHECK(result.report.p95_response_ms == doctest::Approx(20000.0));
}

TEST_CASE("fitness boundary and worked examples") {
    KPIReport instant;
    instant.jobs_arrived = 4;
    instant.jobs_completed = 4;
    instant.mean_response_ms = 0;
    instant.horizon_ms = 1000;
    instant.energy_wh = 0;
    instant.energy_upper_bound_wh = 10;
    CHECK(fitness(instant, {2.5, 1, 1, 1}) == doctest::Approx(2.5));
    CHECK(fitness(instant, {0, 0, 0, 0}) == 0.0);

    KPIReport worked;
    worked.jobs_arrived = 2;
    worked.jobs_completed = 1;
    worked.mean_response_ms = 5000;
    worked.horizon_ms = 10000;
    worked.energy_wh = 2.5;
    worked.energy_upper_bound_wh = 10.0;
    worked.latency_violation_count = 0;
    CHECK(fitness(worked, {1, 1, 1, 1}) == doctest::Approx(-0.25));

    KPIReport empty;
    CHECK(fitness(empty, {1, 1, 1, 1}) == 0.0);
}

TEST_CASE("forecast with empty hypotheticals equals a direct run on a clone") {
    for (const char* name : {"intersection", "mri", "emergency"}) {
        auto s = scenario::load_fixture(name);
        sched::BestFitScheduler bf;
        EngineConfig config;
        auto base = run(s, bf, config);

        sched::BestFitScheduler f1, f2;
        auto forecast_report = forecast(base.state, {}, 60'000, f1, config);
        TwinState clone = base.state.snapshot();
        EngineConfig windowed = config;
        windowed.horizon_ms = 60'000;
        auto direct_report = run_from(clone, {}, f2, windowed);
        CHECK(kpi_report_text(forecast_report) == kpi_report_text(direct_report));
    }
}

TEST_CASE("forecast of a failure of the only viable node fails pinned jobs") {
    scenario::Scenario s;
    s.name = "pinned";
    s.nodes = {make_node("n1")};
    JobSpec j = make_job("j", 500, 60000);
    j.migratable = false;
    s.events = {{0, JobArrival{j}}};
    sched::FirstFitScheduler ff;
    EngineConfig config;
    config.horizon_ms = 10'000;
    auto base = run(s, ff, config);
    REQUIRE(base.report.jobs_failed == 0);

    sched::FirstFitScheduler f;
    std::vector<ScenarioEvent> hypothetical{{base.state.clock() + 1000, NodeFail{"n1"}}};
    auto report = forecast(base.state, hypothetical, 5000, f);
    CHECK(report.jobs_failed == 1);
    // live state unchanged
    CHECK(base.state.job("j").phase == JobPhase::Running);
}

TEST_CASE("forecast horizon 0 reports an empty window") {
    auto s = one_job_scenario();
    sched::FirstFitScheduler ff;
    auto base = run(s, ff, {});
    sched::FirstFitScheduler f;
    auto report = forecast(base.state, {}, 0, f);
    CHECK(report.jobs_completed == 0);
    CHECK(report.horizon_ms == 0);
    CHECK(report.energy_wh == 0.0);
}

TEST_CASE("forecast rejects malformed hypothetical timelines") {
    auto s = one_job_scenario();
    sched::FirstFitScheduler ff;
    auto base = run(s, ff, {});
    sched::FirstFitScheduler f;
    std::vector<ScenarioEvent> bad{{base.state.clock() + 5000, NodeFail{"n1"}},
                                   {base.state.clock() + 1000, NodeRecover{"n1"}}};
    CHECK_THROWS_WITH_AS(forecast(base.state, bad, 10'000, f),
                         doctest::Contains("malformed-timeline"), Error);
    std::vector<ScenarioEvent> outside{{base.state.clock() + 50'000, NodeFail{"n1"}}};
    CHECK_THROWS_AS(forecast(base.state, outside, 10'000, f), Error);
}

TEST_CASE("jobs active at the horizon stay neither completed nor failed") {
    auto s = one_job_scenario(); // 10 s of work
    sched::FirstFitScheduler ff;
    EngineConfig config;
    config.horizon_ms = 4000;
    auto result = run(s, ff, config);
    CHECK(result.report.jobs_arrived == 1);
    CHECK(result.report.jobs_completed == 0);
    CHECK(result.report.jobs_failed == 0);
    CHECK(result.state.clock() == 4000);
    CHECK(result.state.job("j1").phase == JobPhase::Running);
    CHECK(result.state.job("j1").remaining_work == 6000);
    // energy still integrates to the window end
    CHECK(result.report.energy_wh == doctest::Approx(30.0 * 4.0 / 3600.0));
}

TEST_CASE("run rejects an invalid scenario") {
    scenario::Scenario s;
    s.name = "broken";
    s.events = {{0, NodeFail{"ghost"}}};
    sched::FirstFitScheduler ff;
    CHECK_THROWS_WITH_AS(run(s, ff, {}), doctest::Contains("dangling-id"), Error);
}

TEST_CASE("decision points with rescheduling are a superset of those without") {
    auto s = scenario::load_fixture("emergency");
    sched::BestFitScheduler bf1, bf2;
    EngineConfig with_ticks;
    with_ticks.reschedule_interval_ms = 10'000;
    EngineConfig without_ticks;
    without_ticks.reschedule_interval_ms = 0;
    auto r1 = run(s, bf1, with_ticks);
    auto r2 = run(s, bf2, without_ticks);
    std::set<VirtualMs> with_set(r1.decision_points.begin(), r1.decision_points.end());
    for (VirtualMs t : r2.decision_points) CHECK(with_set.count(t) == 1);
    CHECK(r1.decision_points.size() > r2.decision_points.size());
}

TEST_CASE("capacity invariant holds after every step across fixtures") {
    for (const char* name : {"mri", "emergency"}) {
        auto s = scenario::load_fixture(name);
        sched::WeightedScheduler w;
        EngineConfig config;
        config.check_invariants = true; // step() asserts after each decision round
        auto result = run(s, w, config);
        CHECK(result.state.capacity_invariant_holds());
    }
}

TEST_CASE("small-instance oracle: engine matches the oracle's predicted KPIs") {
    // Two nodes, three jobs with contention; the oracle enumerates placements.
    scenario::Scenario s;
    s.name = "oracle-spot";
    s.nodes = {make_node("n1", 1000), make_node("n2", 600)};
    s.events = {{0, JobArrival{make_job("a", 600, 4000)}},
                {0, JobArrival{make_job("b", 600, 2000)}},
                {1000, JobArrival{make_job("c", 500, 1000)}}};

    auto [nodes, jobs] = oracles::oracle_inputs(s);
    oracles::PlacementOracle oracle(nodes, jobs);
    auto best = oracle.solve();
    REQUIRE(best.has_value());

    std::vector<std::pair<VirtualMs, Decision>> script;
    for (const auto& p : best->placements)
        script.emplace_back(p.t, Decision::place(p.job, p.node));
    ScriptedScheduler scripted(script);
    EngineConfig config;
    config.reschedule_interval_ms = 1; // a decision opportunity at every ms
    auto result = run(s, scripted, config);

    CHECK(result.report.jobs_completed == 3);
    CHECK(result.report.mean_response_ms == doctest::Approx(best->mean_response));
    CHECK(result.report.p95_response_ms == doctest::Approx(best->p95_response));
    CHECK(result.report.makespan_ms == best->makespan);
}
