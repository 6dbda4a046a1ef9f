#include "edgetwin/agent.hpp"
#include "edgetwin/engine.hpp"
#include "edgetwin/manager.hpp"
#include "edgetwin/scenario.hpp"
#include "edgetwin/scheduler.hpp"
#include "edgetwin/serialization.hpp"
#include "edgetwin/training.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

namespace {

using namespace edgetwin;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", "cannot read " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot write " + path);
    out << content;
}

bool is_validation_code(const std::string& code) {
    static const std::set<std::string> codes = {
        "syntax",          "unknown-field",   "missing-field",
        "invalid-field",   "invalid-value",   "invalid-params",
        "ordering",        "ordering-violation", "dangling-id",
        "duplicate-job-id", "duplicate-node-id", "duplicate-link",
        "duplicate-job",   "latency-bound-without-source",
        "unknown-fixture", "malformed-timeline"};
    return codes.count(code) > 0;
}

sched::WeightVector weights_from_json(const Json& j) {
    const Json& w = j.contains("best") ? j.at("best") : j;
    sched::WeightVector weights;
    weights.w_fit = w.at("w_fit").get<double>();
    weights.w_latency = w.at("w_latency").get<double>();
    weights.w_energy = w.at("w_energy").get<double>();
    weights.w_balance = w.at("w_balance").get<double>();
    weights.migrate_threshold = w.value("migrate_threshold", 0.2);
    if (!weights.in_bounds()) throw Error("invalid-value", "weights outside [0,1]");
    return weights;
}

std::vector<std::string> split_words(const std::string& command) {
    std::vector<std::string> words;
    std::istringstream in(command);
    std::string word;
    while (in >> word) words.push_back(word);
    return words;
}

/// "first-fit" | "best-fit" | "weighted" | "agent:tcp:host:port" |
/// "agent:cmd..." | path to a weights file.
std::unique_ptr<sched::Scheduler> make_scheduler(const std::string& spec, int agent_timeout_ms) {
    if (spec == "first-fit") return std::make_unique<sched::FirstFitScheduler>();
    if (spec == "best-fit") return std::make_unique<sched::BestFitScheduler>();
    if (spec == "weighted") return std::make_unique<sched::WeightedScheduler>();
    if (spec.rfind("agent:", 0) == 0) {
        std::string rest = spec.substr(6);
        std::unique_ptr<sched::AgentTransport> transport;
        std::string label;
        if (rest.rfind("tcp:", 0) == 0) {
            const std::string addr = rest.substr(4);
            auto colon = addr.rfind(':');
            if (colon == std::string::npos)
                throw Error("invalid-params", "agent:tcp needs host:port");
            transport = sched::connect_agent_tcp(
                addr.substr(0, colon),
                static_cast<std::uint16_t>(std::stoi(addr.substr(colon + 1))));
            label = addr;
        } else {
            if (rest.rfind("cmd:", 0) == 0) rest = rest.substr(4);
            transport = sched::spawn_agent_process(split_words(rest));
            label = split_words(rest).front();
        }
        auto agent = std::make_unique<sched::ExternalAgentScheduler>(std::move(transport), label,
                                                                     agent_timeout_ms);
        agent->handshake();
        return agent;
    }
    Json j = Json::parse(read_file(spec));
    return std::make_unique<sched::WeightedScheduler>(weights_from_json(j));
}

void load_topology(const std::string& path, std::vector<NodeSpec>& nodes,
                   std::vector<LinkSpec>& links) {
    Json j = Json::parse(read_file(path));
    const Json& topo = j.contains("topology") ? j.at("topology") : j;
    for (const auto& n : topo.at("nodes")) nodes.push_back(node_from_json(n, "nodes"));
    if (topo.contains("links"))
        for (const auto& l : topo.at("links")) links.push_back(link_from_json(l, "links"));
}

std::atomic<bool> g_stop{false};
void handle_signal(int) { g_stop = true; }

/// Minimal line reader over an accepted TCP connection for --ingest tcp:PORT.
class FdLineBuf : public std::streambuf {
public:
    explicit FdLineBuf(int fd) : fd_(fd) { setg(buf_, buf_, buf_); }
    ~FdLineBuf() override {
        if (fd_ >= 0) ::close(fd_);
    }

protected:
    int_type underflow() override {
        ssize_t n = ::read(fd_, buf_, sizeof(buf_));
        if (n <= 0) return traits_type::eof();
        setg(buf_, buf_, buf_ + n);
        return traits_type::to_int_type(*gptr());
    }

private:
    int fd_;
    char buf_[4096];
};

int accept_one(int port) {
    int listener = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listener < 0) throw Error("listen", "socket failed");
    int reuse = 1;
    ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &reuse, sizeof(reuse));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
        ::listen(listener, 1) != 0) {
        ::close(listener);
        throw Error("listen", "cannot listen on port " + std::to_string(port));
    }
    int conn = ::accept(listener, nullptr, nullptr);
    ::close(listener);
    if (conn < 0) throw Error("listen", "accept failed");
    return conn;
}

engine::EngineConfig engine_config_from_file(const std::string& path) {
    engine::EngineConfig config;
    Json j = Json::parse(read_file(path));
    require_keys(j, {}, {"reschedule_interval_ms", "strict_latency", "horizon_ms", "rng_seed"},
                 "$");
    if (j.contains("reschedule_interval_ms"))
        config.reschedule_interval_ms = j.at("reschedule_interval_ms").get<VirtualMs>();
    if (j.contains("strict_latency")) config.strict_latency = j.at("strict_latency").get<bool>();
    if (j.contains("horizon_ms")) config.horizon_ms = j.at("horizon_ms").get<VirtualMs>();
    if (j.contains("rng_seed")) config.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"edgetwin: digital-twin simulator and scheduling manager for the "
                 "device-edge-cloud-HPC continuum"};
    app.require_subcommand(1);

    // validate
    std::string validate_path;
    auto* cmd_validate = app.add_subcommand("validate", "Check a scenario document");
    cmd_validate->add_option("scenario", validate_path, "scenario file")->required();

    // simulate
    std::string sim_path, sim_scheduler = "first-fit", sim_config_path, sim_log_path;
    std::int64_t sim_horizon = -1, sim_interval = 10000;
    bool sim_strict = false;
    std::uint64_t sim_seed = 0;
    int sim_agent_timeout = 1000;
    auto* cmd_simulate = app.add_subcommand("simulate", "Run a scenario through the engine");
    cmd_simulate->add_option("scenario", sim_path, "scenario file")->required();
    cmd_simulate->add_option("--scheduler", sim_scheduler, "name, weights file, or agent:<spec>");
    cmd_simulate->add_option("--config", sim_config_path, "engine config JSON");
    cmd_simulate->add_option("--horizon", sim_horizon, "window in virtual ms (-1 = exhaustion)");
    cmd_simulate->add_option("--interval", sim_interval, "reschedule tick ms (0 disables)");
    cmd_simulate->add_flag("--strict-latency", sim_strict, "reject bound-violating placements");
    cmd_simulate->add_option("--seed", sim_seed, "engine rng seed");
    cmd_simulate->add_option("--log", sim_log_path, "write the decision log here");
    cmd_simulate->add_option("--agent-timeout", sim_agent_timeout, "agent deadline wall ms");

    // train
    std::vector<std::string> train_fixtures, train_scenarios;
    int train_generations = 20, train_population = 16, train_elites = 4;
    double train_sigma = 0.1, train_decay = 0.95;
    std::uint64_t train_seed = 0;
    std::string train_out;
    std::int64_t train_horizon = -1, train_interval = 10000;
    unsigned train_threads = 0;
    std::vector<double> train_objective;
    auto* cmd_train = app.add_subcommand("train", "Evolve weighted-scheduler parameters");
    cmd_train->add_option("--fixtures", train_fixtures, "embedded fixture names");
    cmd_train->add_option("--scenarios", train_scenarios, "scenario file paths");
    cmd_train->add_option("--generations", train_generations, "generations")->required();
    cmd_train->add_option("--seed", train_seed, "training seed")->required();
    cmd_train->add_option("--out", train_out, "result file");
    cmd_train->add_option("--population", train_population, "population size");
    cmd_train->add_option("--elites", train_elites, "elite count");
    cmd_train->add_option("--sigma", train_sigma, "initial mutation sigma");
    cmd_train->add_option("--decay", train_decay, "sigma decay per generation");
    cmd_train->add_option("--horizon", train_horizon, "engine horizon (-1 = exhaustion)");
    cmd_train->add_option("--interval", train_interval, "reschedule tick ms");
    cmd_train->add_option("--threads", train_threads, "evaluation workers (0 = auto)");
    cmd_train->add_option("--objective", train_objective,
                          "fitness weights alpha beta gamma delta");
    std::string train_init;
    cmd_train->add_option("--init", train_init, "warm-start from a saved result's best weights");

    // forecast
    std::string fc_path, fc_events_path, fc_scheduler = "first-fit";
    std::int64_t fc_horizon = 0, fc_interval = 10000;
    auto* cmd_forecast = app.add_subcommand("forecast", "What-if run over a cloned state");
    cmd_forecast->add_option("input", fc_path, "scenario or snapshot file")->required();
    cmd_forecast->add_option("--events", fc_events_path, "hypothetical events JSON array");
    cmd_forecast->add_option("--horizon", fc_horizon, "forecast window virtual ms")->required();
    cmd_forecast->add_option("--scheduler", fc_scheduler, "scheduler for the forecast");
    cmd_forecast->add_option("--interval", fc_interval, "reschedule tick ms");

    // serve
    std::string serve_topology, serve_scheduler = "first-fit", serve_listen = "127.0.0.1:8080";
    std::string serve_ingest = "stdin", serve_log;
    int serve_cadence = 1000;
    bool serve_replay = false;
    int serve_agent_timeout = 1000;
    auto* cmd_serve = app.add_subcommand("serve", "Run the live manager loop");
    cmd_serve->add_option("--topology", serve_topology, "topology or scenario file")->required();
    cmd_serve->add_option("--scheduler", serve_scheduler, "scheduler spec");
    cmd_serve->add_option("--listen", serve_listen, "query API host:port");
    cmd_serve->add_option("--ingest", serve_ingest, "stdin or tcp:PORT");
    cmd_serve->add_option("--log", serve_log, "append-only persistence file");
    cmd_serve->add_option("--cadence", serve_cadence, "scheduling cadence wall ms");
    cmd_serve->add_flag("--replay", serve_replay, "restore state from the persistence file");
    cmd_serve->add_option("--agent-timeout", serve_agent_timeout, "agent deadline wall ms");

    // fixtures
    auto* cmd_fixtures = app.add_subcommand("fixtures", "Embedded use-case scenarios");
    auto* cmd_fixtures_list = cmd_fixtures->add_subcommand("list", "List fixture names");
    std::string fixture_name, fixture_out;
    auto* cmd_fixtures_export = cmd_fixtures->add_subcommand("export", "Print a fixture");
    cmd_fixtures_export->add_option("name", fixture_name, "fixture name")->required();
    cmd_fixtures_export->add_option("--out", fixture_out, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_validate->parsed()) {
            scenario::Scenario s;
            try {
                s = scenario::parse_scenario_unchecked(read_file(validate_path));
            } catch (const Error& e) {
                std::cerr << e.code() << ": " << e.what() << "\n";
                return kExitValidation;
            }
            auto issues = scenario::validate_scenario(s);
            for (const auto& issue : issues)
                std::cerr << issue.code << " at " << issue.path << ": " << issue.message << "\n";
            if (!issues.empty()) return kExitValidation;
            std::cout << "valid: " << s.name << " (" << s.nodes.size() << " nodes, "
                      << s.links.size() << " links, " << s.events.size() << " events)\n";
            return kExitOk;
        }

        if (cmd_simulate->parsed()) {
            auto s = scenario::parse_scenario(read_file(sim_path));
            engine::EngineConfig config;
            if (!sim_config_path.empty()) config = engine_config_from_file(sim_config_path);
            if (cmd_simulate->count("--interval") || sim_config_path.empty())
                config.reschedule_interval_ms = sim_interval;
            if (sim_horizon >= 0) config.horizon_ms = sim_horizon;
            if (sim_strict) config.strict_latency = true;
            config.rng_seed = sim_seed;
            auto scheduler = make_scheduler(sim_scheduler, sim_agent_timeout);
            auto result = engine::run(s, *scheduler, config);
            std::cout << engine::kpi_report_text(result.report);
            if (!sim_log_path.empty())
                write_file(sim_log_path, engine::decision_log_text(result.state));
            return kExitOk;
        }

        if (cmd_train->parsed()) {
            training::TrainingConfig config;
            for (const auto& name : train_fixtures)
                config.batch.push_back(scenario::load_fixture(name));
            for (const auto& path : train_scenarios)
                config.batch.push_back(scenario::parse_scenario(read_file(path)));
            if (config.batch.empty())
                throw Error("invalid-params", "need --fixtures or --scenarios");
            config.population_size = train_population;
            config.elite_count = train_elites;
            config.generations = train_generations;
            config.sigma0 = train_sigma;
            config.sigma_decay = train_decay;
            config.seed = train_seed;
            config.threads = train_threads;
            if (!train_objective.empty()) {
                if (train_objective.size() != 4)
                    throw Error("invalid-params", "--objective needs four weights");
                config.objective = {train_objective[0], train_objective[1], train_objective[2],
                                    train_objective[3]};
            }
            config.engine_config.reschedule_interval_ms = train_interval;
            if (train_horizon >= 0) config.engine_config.horizon_ms = train_horizon;
            if (!train_init.empty())
                config.seed_population.push_back(
                    weights_from_json(Json::parse(read_file(train_init))));
            auto result = training::train_population(config);
            const std::string text = training::training_result_text(result, config);
            if (!train_out.empty()) write_file(train_out, text);
            else std::cout << text;
            std::cerr << "best fitness " << result.best_fitness << " after "
                      << result.evaluations << " evaluations\n";
            return kExitOk;
        }

        if (cmd_forecast->parsed()) {
            Json input = Json::parse(read_file(fc_path));
            TwinState state;
            auto scheduler = make_scheduler(fc_scheduler, 1000);
            engine::EngineConfig config;
            config.reschedule_interval_ms = fc_interval;
            if (input.contains("topology")) {
                auto s = scenario::parse_scenario(read_file(fc_path));
                auto result = engine::run(s, *scheduler, config);
                state = std::move(result.state);
            } else {
                state = twin_from_json(input);
            }
            std::vector<ScenarioEvent> events;
            if (!fc_events_path.empty()) {
                Json list = Json::parse(read_file(fc_events_path));
                std::size_t i = 0;
                for (const auto& e : list)
                    events.push_back(event_from_json(e, "events[" + std::to_string(i++) + "]"));
            }
            auto report = engine::forecast(state, events, fc_horizon, *scheduler, config);
            std::cout << engine::kpi_report_text(report);
            return kExitOk;
        }

        if (cmd_serve->parsed()) {
            std::vector<NodeSpec> nodes;
            std::vector<LinkSpec> links;
            load_topology(serve_topology, nodes, links);
            manager::ManagerConfig config;
            config.log_path = serve_log;
            config.cadence_ms = serve_cadence;
            config.defer_publish = serve_replay;
            std::shared_ptr<sched::Scheduler> scheduler(
                make_scheduler(serve_scheduler, serve_agent_timeout).release());
            manager::LiveManager live(nodes, links, scheduler, config);
            if (serve_replay && !serve_log.empty()) {
                std::size_t n = live.replay_log_file();
                std::cerr << "replayed " << n << " records\n";
            }
            auto colon = serve_listen.rfind(':');
            const std::string host =
                colon == std::string::npos || colon == 0 ? "127.0.0.1"
                                                         : serve_listen.substr(0, colon);
            const int port = std::stoi(serve_listen.substr(colon + 1));
            live.start_http(host, port);
            std::signal(SIGINT, handle_signal);
            std::signal(SIGTERM, handle_signal);
            if (serve_ingest.rfind("tcp:", 0) == 0) {
                int conn = accept_one(std::stoi(serve_ingest.substr(4)));
                FdLineBuf buf(conn);
                std::istream in(&buf);
                live.run_stream(in, g_stop, &std::cout);
            } else {
                live.run_stream(std::cin, g_stop, &std::cout);
            }
            live.stop_http();
            return kExitOk;
        }

        if (cmd_fixtures_list->parsed()) {
            for (const auto& name : scenario::fixture_names()) std::cout << name << "\n";
            return kExitOk;
        }
        if (cmd_fixtures_export->parsed()) {
            auto s = scenario::load_fixture(fixture_name);
            const std::string text = scenario::serialize_scenario(s);
            if (!fixture_out.empty()) write_file(fixture_out, text);
            else std::cout << text;
            return kExitOk;
        }
    } catch (const Error& e) {
        std::cerr << e.code() << ": " << e.what() << "\n";
        return is_validation_code(e.code()) ? kExitValidation : kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
