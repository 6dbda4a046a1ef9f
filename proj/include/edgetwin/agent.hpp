#pragma once

#include "edgetwin/scheduler.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace edgetwin::sched {

/// Byte-stream line transport for the agent wire protocol.
class AgentTransport {
public:
    virtual ~AgentTransport() = default;
    virtual bool send_line(const std::string& line) = 0;
    /// One newline-terminated line (without the newline), or nullopt on
    /// timeout or stream end.
    virtual std::optional<std::string> read_line(int timeout_ms) = 0;
};

/// Child process speaking the protocol on its standard input/output.
std::unique_ptr<AgentTransport> spawn_agent_process(const std::vector<std::string>& argv);

/// TCP client transport.
std::unique_ptr<AgentTransport> connect_agent_tcp(const std::string& host, std::uint16_t port);

inline constexpr int kAgentProtocolVersion = 1;

/// Scheduler delegating decisions to an external agent over newline-delimited
/// JSON. Host sends {"type":"hello","protocol":1}, then one
/// {"type":"decide","snapshot":...} per round and expects
/// {"type":"decisions","decisions":[...]} within the response deadline.
/// Timeouts and malformed responses are non-fatal: the round falls back to
/// delaying every queued job and a protocol fault is recorded.
class ExternalAgentScheduler final : public Scheduler {
public:
    ExternalAgentScheduler(std::unique_ptr<AgentTransport> transport, std::string label,
                           int timeout_ms = 1000);

    /// Hello exchange. Throws Error("protocol-version") on a version
    /// mismatch; returns false (recording a fault) on timeout or garbage.
    bool handshake();

    std::string name() const override { return "agent:" + label_; }
    std::vector<Decision> decide(const TwinState& snapshot) override;

    int faults() const { return faults_; }

private:
    std::vector<Decision> fallback(const TwinState& snapshot);

    std::unique_ptr<AgentTransport> transport_;
    std::string label_;
    int timeout_ms_;
    int faults_ = 0;
    bool ready_ = false;
};

} // namespace edgetwin::sched
