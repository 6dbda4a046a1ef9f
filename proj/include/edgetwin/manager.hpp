#pragma once

#include "edgetwin/engine.hpp"
#include "edgetwin/scheduler.hpp"
#include "edgetwin/twin.hpp"

#include <atomic>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace edgetwin::manager {

struct ManagerConfig {
    /// Append-only persistence file; empty disables persistence.
    std::string log_path;
    /// Wall-clock scheduling cadence for the CLI loop.
    int cadence_ms = 1000;
    bool fsync_per_batch = true;
    /// Hold back the first snapshot/KPI publication until the state is ready
    /// (after replay); queries answer 503 until then.
    bool defer_publish = false;
    engine::EngineConfig engine;
};

struct IngestResult {
    bool applied = false;
    std::string reason; // "parse" | "ordering" | "dangling-id" when rejected

    static IngestResult ok() { return {true, {}}; }
    static IngestResult rejected(std::string reason) { return {false, std::move(reason)}; }
};

/// The deployed-loop facade: ingests metric/job events into the twin, invokes
/// the scheduler on a cadence, persists every record before applying it, and
/// serves read-only snapshot/KPI queries from published value copies.
///
/// Concurrency: one state mutex serializes ingestion and ticks; queries read
/// published immutable documents and never touch the state mutex.
class LiveManager {
public:
    LiveManager(std::vector<NodeSpec> nodes, std::vector<LinkSpec> links,
                std::shared_ptr<sched::Scheduler> scheduler, ManagerConfig config);
    ~LiveManager();

    /// Replay an existing persistence file over the initial topology,
    /// restoring the twin exactly. Returns the number of replayed records.
    std::size_t replay_log_file();

    /// One wire record: a scenario event or {"kind":"heartbeat","t":..}.
    /// Valid records are persisted, then applied; the stream survives
    /// malformed or stale lines.
    IngestResult ingest_line(const std::string& line);

    /// One scheduling pass: snapshot, decide, validate, apply; decision
    /// records are persisted and returned in wire form.
    std::vector<std::string> tick();

    /// Closes the persistence file with a terminal record.
    void shutdown();

    /// Blocking loop for the CLI: reads ingest lines from `in` while ticking
    /// every cadence interval, until the stream ends or `stop` is set.
    void run_stream(std::istream& in, std::atomic<bool>& stop, std::ostream* decision_sink);

    /// Published immutable documents (null before initialization).
    std::shared_ptr<const std::string> snapshot_text() const;
    std::shared_ptr<const std::string> kpis_text() const;

    /// HTTP/1.1 query API: GET /snapshot, GET /kpis.
    void start_http(const std::string& host, int port);
    void stop_http();

    /// Test access; serializes against ingestion.
    TwinState state_copy() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace edgetwin::manager
