#include "edgetwin/manager.hpp"

#include "edgetwin/serialization.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <istream>
#include <thread>

#include <unistd.h>

namespace edgetwin::manager {

namespace {

std::int64_t wall_ms_now() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

std::string map_reject_code(const std::string& code) {
    if (code == "ordering") return "ordering";
    if (code == "syntax" || code == "malformed" || code == "missing-field" ||
        code == "unknown-field" || code == "invalid-field" || code == "invalid-value")
        return "parse";
    return "dangling-id";
}

} // namespace

struct LiveManager::Impl {
    mutable std::mutex state_mutex;
    TwinState state;
    std::vector<NodeSpec> topology;
    std::shared_ptr<sched::Scheduler> scheduler;
    ManagerConfig config;

    std::FILE* log_file = nullptr;
    bool halted = false;

    mutable std::mutex publish_mutex;
    std::shared_ptr<const std::string> snapshot_doc;
    std::shared_ptr<const std::string> kpis_doc;

    std::unique_ptr<httplib::Server> http;
    std::thread http_thread;

    /// Append one record; per the write-ahead rule callers persist before
    /// applying. Retries with backoff, then halts the loop.
    bool persist(const std::string& line) {
        if (!log_file) return true;
        for (int attempt = 0; attempt < 4; ++attempt) {
            if (std::fputs(line.c_str(), log_file) >= 0 && std::fputc('\n', log_file) != EOF)
                return true;
            std::this_thread::sleep_for(std::chrono::milliseconds(10 << attempt));
            std::clearerr(log_file);
        }
        halted = true;
        return false;
    }

    void sync() {
        if (!log_file || !config.fsync_per_batch) return;
        std::fflush(log_file);
        ::fsync(::fileno(log_file));
    }

    void publish_locked() {
        auto snapshot = std::make_shared<const std::string>(twin_to_json(state).dump());
        auto kpis = std::make_shared<const std::string>(engine::kpi_report_text(
            engine::compute_kpis(state.log(), topology, 0, 0, state.clock())));
        std::lock_guard<std::mutex> lock(publish_mutex);
        snapshot_doc = std::move(snapshot);
        kpis_doc = std::move(kpis);
    }

    IngestResult apply_line(const std::string& line, bool persist_record) {
        Json j;
        try {
            j = Json::parse(line);
        } catch (const std::exception&) {
            return IngestResult::rejected("parse");
        }
        if (!j.is_object() || !j.contains("kind")) return IngestResult::rejected("parse");
        try {
            if (j.at("kind") == "heartbeat") {
                require_keys(j, {"kind", "t"}, {}, "$");
                const VirtualMs t = get_int(j, "t", "$");
                if (t < state.clock()) return IngestResult::rejected("ordering");
                if (persist_record && !persist(line)) return IngestResult::rejected("sink");
                state.advance_to(t);
                return IngestResult::ok();
            }
            if (j.at("kind") == "shutdown") return IngestResult::ok(); // replay artifact
            ScenarioEvent event = event_from_json(j, "$");
            if (event.t < state.clock()) return IngestResult::rejected("ordering");
            if (persist_record && !persist(line)) return IngestResult::rejected("sink");
            state.apply_event(event, "ingest");
            state.fire_due_transitions();
            return IngestResult::ok();
        } catch (const Error& e) {
            return IngestResult::rejected(map_reject_code(e.code()));
        }
    }
};

LiveManager::LiveManager(std::vector<NodeSpec> nodes, std::vector<LinkSpec> links,
                         std::shared_ptr<sched::Scheduler> scheduler, ManagerConfig config)
    : impl_(std::make_unique<Impl>()) {
    impl_->state = TwinState(nodes, links);
    impl_->topology = std::move(nodes);
    impl_->scheduler = std::move(scheduler);
    impl_->config = std::move(config);
    if (!impl_->config.log_path.empty()) {
        impl_->log_file = std::fopen(impl_->config.log_path.c_str(), "a");
        if (!impl_->log_file)
            throw Error("sink", "cannot open log file " + impl_->config.log_path);
    }
    if (!impl_->config.defer_publish) impl_->publish_locked();
}

LiveManager::~LiveManager() {
    stop_http();
    if (impl_->log_file) std::fclose(impl_->log_file);
}

std::size_t LiveManager::replay_log_file() {
    std::lock_guard<std::mutex> lock(impl_->state_mutex);
    std::ifstream in(impl_->config.log_path);
    if (!in) return 0;
    std::size_t replayed = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const std::exception&) {
            continue; // trailing partial write after a crash
        }
        if (j.contains("kind")) {
            impl_->apply_line(line, false);
            ++replayed;
            continue;
        }
        // Decision record: re-apply the validated outcome at its virtual time.
        try {
            const VirtualMs t = j.at("t").get<VirtualMs>();
            const std::string action = j.at("action").get<std::string>();
            const std::string outcome = j.at("outcome").get<std::string>();
            const std::string actor = j.at("actor").get<std::string>();
            const std::string job = j.value("job", "");
            const std::string node = j.value("node", "");
            if (t >= impl_->state.clock()) impl_->state.advance_to(t);
            if (outcome == "applied") {
                if (action == "place") impl_->state.place_job(job, node, actor);
                else if (action == "migrate") impl_->state.migrate_job(job, node, actor);
                else
                    impl_->state.append_log({t, actor, action, job, node, "applied",
                                             std::nullopt});
            } else {
                impl_->state.append_log({t, actor, action, job, node, outcome, std::nullopt});
            }
            ++replayed;
        } catch (const std::exception&) {
            continue;
        }
    }
    impl_->publish_locked();
    return replayed;
}

IngestResult LiveManager::ingest_line(const std::string& line) {
    std::lock_guard<std::mutex> lock(impl_->state_mutex);
    if (impl_->halted) return IngestResult::rejected("sink");
    IngestResult result = impl_->apply_line(line, true);
    if (result.applied) {
        impl_->sync();
        impl_->publish_locked();
    }
    return result;
}

std::vector<std::string> LiveManager::tick() {
    std::lock_guard<std::mutex> lock(impl_->state_mutex);
    if (impl_->halted) return {};
    impl_->state.fire_due_transitions();
    const std::size_t before = impl_->state.log().size();
    engine::step(impl_->state, *impl_->scheduler, impl_->config.engine);

    std::vector<std::string> records;
    const std::int64_t wall = wall_ms_now();
    for (std::size_t i = before; i < impl_->state.log().size(); ++i) {
        Json record = log_entry_to_json(impl_->state.log()[i]);
        record["wall_ms"] = wall;
        records.push_back(record.dump());
    }
    for (const std::string& record : records) {
        if (!impl_->persist(record)) break;
    }
    impl_->sync();
    impl_->publish_locked();
    return records;
}

void LiveManager::shutdown() {
    std::lock_guard<std::mutex> lock(impl_->state_mutex);
    if (impl_->log_file) {
        Json record;
        record["kind"] = "shutdown";
        record["t"] = impl_->state.clock();
        impl_->persist(record.dump());
        impl_->sync();
    }
}

void LiveManager::run_stream(std::istream& in, std::atomic<bool>& stop,
                             std::ostream* decision_sink) {
    std::atomic<bool> input_done{false};
    std::mutex sink_mutex;
    std::thread ticker([&] {
        while (!stop.load() && !input_done.load()) {
            std::this_thread::sleep_for(std::chrono::milliseconds(impl_->config.cadence_ms));
            auto records = tick();
            if (decision_sink && !records.empty()) {
                std::lock_guard<std::mutex> lock(sink_mutex);
                for (const auto& r : records) (*decision_sink) << r << '\n';
                decision_sink->flush();
            }
        }
    });
    std::string line;
    while (!stop.load() && std::getline(in, line)) {
        if (line.empty()) continue;
        IngestResult result = ingest_line(line);
        if (!result.applied && decision_sink) {
            std::lock_guard<std::mutex> lock(sink_mutex);
            (*decision_sink) << R"({"rejected":")" << result.reason << R"("})" << '\n';
        }
    }
    input_done = true;
    ticker.join();
    // Final pass so jobs arriving just before stream end still get decisions.
    auto records = tick();
    if (decision_sink) {
        std::lock_guard<std::mutex> lock(sink_mutex);
        for (const auto& r : records) (*decision_sink) << r << '\n';
        decision_sink->flush();
    }
    shutdown();
}

std::shared_ptr<const std::string> LiveManager::snapshot_text() const {
    std::lock_guard<std::mutex> lock(impl_->publish_mutex);
    return impl_->snapshot_doc;
}

std::shared_ptr<const std::string> LiveManager::kpis_text() const {
    std::lock_guard<std::mutex> lock(impl_->publish_mutex);
    return impl_->kpis_doc;
}

void LiveManager::start_http(const std::string& host, int port) {
    impl_->http = std::make_unique<httplib::Server>();
    impl_->http->Get("/snapshot", [this](const httplib::Request&, httplib::Response& res) {
        auto doc = snapshot_text();
        if (!doc) {
            res.status = 503;
            return;
        }
        res.set_content(*doc, "application/json");
    });
    impl_->http->Get("/kpis", [this](const httplib::Request&, httplib::Response& res) {
        auto doc = kpis_text();
        if (!doc) {
            res.status = 503;
            return;
        }
        res.set_content(*doc, "application/json");
    });
    if (!impl_->http->bind_to_port(host, port))
        throw Error("listen", host + ":" + std::to_string(port));
    impl_->http_thread = std::thread([this] { impl_->http->listen_after_bind(); });
    impl_->http->wait_until_ready();
}

void LiveManager::stop_http() {
    if (impl_->http) {
        impl_->http->stop();
        if (impl_->http_thread.joinable()) impl_->http_thread.join();
        impl_->http.reset();
    }
}

TwinState LiveManager::state_copy() const {
    std::lock_guard<std::mutex> lock(impl_->state_mutex);
    return impl_->state;
}

} // namespace edgetwin::manager
