#include "edgetwin/engine.hpp"
#include "edgetwin/scenario.hpp"
#include "edgetwin/scheduler.hpp"
#include "edgetwin/serialization.hpp"
#include "edgetwin/training.hpp"
#include "edgetwin/twin.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

namespace py = pybind11;
using namespace edgetwin;

namespace {

scenario::Scenario scenario_from_text(const std::string& text) {
    return scenario::parse_scenario(text);
}

std::unique_ptr<sched::Scheduler> scheduler_from_spec(const std::string& name,
                                                      const std::string& weights_json) {
    if (!weights_json.empty()) {
        Json j = Json::parse(weights_json);
        sched::WeightVector w;
        w.w_fit = j.at("w_fit").get<double>();
        w.w_latency = j.at("w_latency").get<double>();
        w.w_energy = j.at("w_energy").get<double>();
        w.w_balance = j.at("w_balance").get<double>();
        w.migrate_threshold = j.value("migrate_threshold", 0.2);
        return std::make_unique<sched::WeightedScheduler>(w);
    }
    if (name == "first-fit") return std::make_unique<sched::FirstFitScheduler>();
    if (name == "best-fit") return std::make_unique<sched::BestFitScheduler>();
    if (name == "weighted") return std::make_unique<sched::WeightedScheduler>();
    throw Error("invalid-params", "unknown scheduler '" + name + "'");
}

engine::EngineConfig config_from_args(std::int64_t horizon_ms, std::int64_t interval_ms,
                                      bool strict_latency) {
    engine::EngineConfig config;
    config.reschedule_interval_ms = interval_ms;
    config.strict_latency = strict_latency;
    if (horizon_ms >= 0) config.horizon_ms = horizon_ms;
    return config;
}

/// Lightweight twin handle for direct state-model experiments from python.
class PyTwin {
public:
    explicit PyTwin(const std::string& scenario_text) {
        auto s = scenario_from_text(scenario_text);
        state_ = TwinState(s.nodes, s.links);
    }

    std::optional<VirtualMs> path_latency(const std::string& a, const std::string& b) const {
        return state_.path_latency(a, b);
    }
    std::optional<VirtualMs> transfer_time(const std::string& a, const std::string& b,
                                           double mb) const {
        return state_.transfer_time(a, b, mb);
    }
    void apply_event(const std::string& event_json) {
        state_.apply_event(event_from_json(Json::parse(event_json), "$"));
        state_.fire_due_transitions();
    }
    void place(const std::string& job, const std::string& node) { state_.place_job(job, node); }
    void advance_to(VirtualMs t) { state_.advance_to(t); }
    VirtualMs clock() const { return state_.clock(); }
    std::string snapshot() const { return twin_to_json(state_).dump(); }

private:
    TwinState state_;
};

} // namespace

PYBIND11_MODULE(_edgetwin, m) {
    m.doc() = "Digital-twin simulator of a device-edge-cloud-HPC continuum";

    py::register_exception<Error>(m, "EdgetwinError");

    m.def("fixture_names", [] { return scenario::fixture_names(); });

    m.def("load_fixture", [](const std::string& name) {
        return scenario::serialize_scenario(scenario::load_fixture(name));
    });

    m.def("parse_scenario", [](const std::string& text) {
        return scenario::serialize_scenario(scenario_from_text(text));
    });

    m.def("validate_scenario", [](const std::string& text) {
        auto s = scenario::parse_scenario_unchecked(text);
        Json issues = Json::array();
        for (const auto& issue : scenario::validate_scenario(s)) {
            issues.push_back(Json{{"code", issue.code},
                                  {"path", issue.path},
                                  {"message", issue.message}});
        }
        return issues.dump();
    });

    m.def(
        "generate_synthetic",
        [](const std::string& params_json, std::uint64_t seed) {
            Json j = Json::parse(params_json);
            scenario::SynthesisParams p;
            if (j.contains("name")) p.name = j.at("name").get<std::string>();
            if (j.contains("n_iot")) p.n_iot = j.at("n_iot").get<int>();
            if (j.contains("n_edge")) p.n_edge = j.at("n_edge").get<int>();
            if (j.contains("n_cloud")) p.n_cloud = j.at("n_cloud").get<int>();
            if (j.contains("n_hpc")) p.n_hpc = j.at("n_hpc").get<int>();
            if (j.contains("job_count")) p.job_count = j.at("job_count").get<int>();
            if (j.contains("arrival_rate_per_s"))
                p.arrival_rate_per_s = j.at("arrival_rate_per_s").get<double>();
            if (j.contains("failure_rate_per_h"))
                p.failure_rate_per_h = j.at("failure_rate_per_h").get<double>();
            if (j.contains("horizon_ms")) p.horizon_ms = j.at("horizon_ms").get<VirtualMs>();
            return scenario::serialize_scenario(scenario::generate_synthetic(p, seed));
        },
        py::arg("params_json") = "{}", py::arg("seed") = 0);

    m.def(
        "simulate",
        [](const std::string& scenario_text, const std::string& scheduler,
           const std::string& weights_json, std::int64_t horizon_ms, std::int64_t interval_ms,
           bool strict_latency, bool include_log) {
            auto s = scenario_from_text(scenario_text);
            auto sched_ptr = scheduler_from_spec(scheduler, weights_json);
            auto result = engine::run(
                s, *sched_ptr, config_from_args(horizon_ms, interval_ms, strict_latency));
            Json out;
            out["kpis"] = Json::parse(engine::kpi_report_text(result.report));
            if (include_log) out["decision_log"] = engine::decision_log_text(result.state);
            return out.dump();
        },
        py::arg("scenario"), py::arg("scheduler") = "first-fit", py::arg("weights_json") = "",
        py::arg("horizon_ms") = -1, py::arg("interval_ms") = 10000,
        py::arg("strict_latency") = false, py::arg("include_log") = false);

    m.def(
        "forecast",
        [](const std::string& scenario_text, const std::string& events_json,
           std::int64_t horizon_ms, const std::string& scheduler) {
            auto s = scenario_from_text(scenario_text);
            auto sched_ptr = scheduler_from_spec(scheduler, "");
            engine::EngineConfig config;
            auto base = engine::run(s, *sched_ptr, config);
            std::vector<ScenarioEvent> events;
            for (const auto& e : Json::parse(events_json))
                events.push_back(event_from_json(e, "$"));
            auto report = engine::forecast(base.state, events, horizon_ms, *sched_ptr, config);
            return engine::kpi_report_text(report);
        },
        py::arg("scenario"), py::arg("events_json") = "[]", py::arg("horizon_ms") = 0,
        py::arg("scheduler") = "first-fit");

    m.def(
        "train",
        [](const std::vector<std::string>& scenario_texts, int generations, std::uint64_t seed,
           int population, int elites, double sigma, double decay, std::int64_t horizon_ms,
           std::int64_t interval_ms, unsigned threads) {
            training::TrainingConfig config;
            for (const auto& text : scenario_texts)
                config.batch.push_back(scenario_from_text(text));
            config.generations = generations;
            config.seed = seed;
            config.population_size = population;
            config.elite_count = elites;
            config.sigma0 = sigma;
            config.sigma_decay = decay;
            config.threads = threads;
            config.engine_config = config_from_args(horizon_ms, interval_ms, false);
            auto result = training::train_population(config);
            return training::training_result_text(result, config);
        },
        py::arg("scenarios"), py::arg("generations") = 5, py::arg("seed") = 0,
        py::arg("population") = 16, py::arg("elites") = 4, py::arg("sigma") = 0.1,
        py::arg("decay") = 0.95, py::arg("horizon_ms") = -1, py::arg("interval_ms") = 10000,
        py::arg("threads") = 0);

    m.def(
        "fitness",
        [](const std::string& kpis_json, double alpha, double beta, double gamma, double delta) {
            Json j = Json::parse(kpis_json);
            engine::KPIReport report;
            report.jobs_arrived = j.at("jobs_arrived").get<std::int64_t>();
            report.jobs_completed = j.at("jobs_completed").get<std::int64_t>();
            report.jobs_failed = j.at("jobs_failed").get<std::int64_t>();
            report.mean_response_ms = j.at("mean_response_ms").get<double>();
            report.latency_violation_count = j.at("latency_violation_count").get<std::int64_t>();
            report.energy_wh = j.at("energy_wh").get<double>();
            report.horizon_ms = j.at("horizon_ms").get<VirtualMs>();
            report.energy_upper_bound_wh = j.at("energy_upper_bound_wh").get<double>();
            return engine::fitness(report, {alpha, beta, gamma, delta});
        },
        py::arg("kpis_json"), py::arg("alpha") = 1.0, py::arg("beta") = 1.0,
        py::arg("gamma") = 1.0, py::arg("delta") = 1.0);

    py::class_<PyTwin>(m, "Twin")
        .def(py::init<const std::string&>(), py::arg("scenario"))
        .def("path_latency", &PyTwin::path_latency)
        .def("transfer_time", &PyTwin::transfer_time)
        .def("apply_event", &PyTwin::apply_event)
        .def("place", &PyTwin::place)
        .def("advance_to", &PyTwin::advance_to)
        .def("clock", &PyTwin::clock)
        .def("snapshot", &PyTwin::snapshot);
}
