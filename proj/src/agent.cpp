#include "edgetwin/agent.hpp"

#include "edgetwin/serialization.hpp"

#include <chrono>
#include <cstring>

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

namespace edgetwin::sched {

namespace {

using Clock = std::chrono::steady_clock;

/// Line framing over a pair of file descriptors with a read deadline.
class FdTransport : public AgentTransport {
public:
    FdTransport(int read_fd, int write_fd, pid_t child = -1)
        : read_fd_(read_fd), write_fd_(write_fd), child_(child) {}

    ~FdTransport() override {
        if (read_fd_ >= 0) ::close(read_fd_);
        if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
        if (child_ > 0) {
            ::kill(child_, SIGTERM);
            int status = 0;
            if (::waitpid(child_, &status, WNOHANG) == 0) {
                ::usleep(50'000);
                if (::waitpid(child_, &status, WNOHANG) == 0) {
                    ::kill(child_, SIGKILL);
                    ::waitpid(child_, &status, 0);
                }
            }
        }
    }

    bool send_line(const std::string& line) override {
        std::string framed = line + "\n";
        const char* data = framed.data();
        std::size_t left = framed.size();
        while (left > 0) {
            ssize_t n = ::write(write_fd_, data, left);
            if (n <= 0) return false;
            data += n;
            left -= static_cast<std::size_t>(n);
        }
        return true;
    }

    std::optional<std::string> read_line(int timeout_ms) override {
        const auto deadline = Clock::now() + std::chrono::milliseconds(timeout_ms);
        while (true) {
            auto newline = buffer_.find('\n');
            if (newline != std::string::npos) {
                std::string line = buffer_.substr(0, newline);
                buffer_.erase(0, newline + 1);
                return line;
            }
            const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
                deadline - Clock::now());
            if (remaining.count() <= 0) return std::nullopt;
            struct pollfd pfd{read_fd_, POLLIN, 0};
            int ready = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
            if (ready < 0) {
                if (errno == EINTR) continue;
                return std::nullopt;
            }
            if (ready == 0) return std::nullopt; // deadline
            char chunk[4096];
            ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
            if (n <= 0) return std::nullopt; // stream closed
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

private:
    int read_fd_;
    int write_fd_;
    pid_t child_;
    std::string buffer_;
};

} // namespace

std::unique_ptr<AgentTransport> spawn_agent_process(const std::vector<std::string>& argv) {
    if (argv.empty()) throw Error("invalid-params", "empty agent command");
    int to_child[2], from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0)
        throw Error("agent-spawn", "pipe failed");
    pid_t pid = ::fork();
    if (pid < 0) throw Error("agent-spawn", "fork failed");
    if (pid == 0) {
        ::dup2(to_child[0], STDIN_FILENO);
        ::dup2(from_child[1], STDOUT_FILENO);
        ::close(to_child[0]);
        ::close(to_child[1]);
        ::close(from_child[0]);
        ::close(from_child[1]);
        std::vector<char*> args;
        for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        ::execvp(args[0], args.data());
        ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    return std::make_unique<FdTransport>(from_child[0], to_child[1], pid);
}

std::unique_ptr<AgentTransport> connect_agent_tcp(const std::string& host, std::uint16_t port) {
    struct addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    struct addrinfo* info = nullptr;
    if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &info) != 0 || !info)
        throw Error("agent-connect", "cannot resolve " + host);
    int fd = ::socket(info->ai_family, info->ai_socktype, info->ai_protocol);
    if (fd < 0 || ::connect(fd, info->ai_addr, info->ai_addrlen) != 0) {
        ::freeaddrinfo(info);
        if (fd >= 0) ::close(fd);
        throw Error("agent-connect", host + ":" + std::to_string(port));
    }
    ::freeaddrinfo(info);
    return std::make_unique<FdTransport>(fd, fd);
}

ExternalAgentScheduler::ExternalAgentScheduler(std::unique_ptr<AgentTransport> transport,
                                               std::string label, int timeout_ms)
    : transport_(std::move(transport)), label_(std::move(label)), timeout_ms_(timeout_ms) {}

bool ExternalAgentScheduler::handshake() {
    Json hello;
    hello["type"] = "hello";
    hello["protocol"] = kAgentProtocolVersion;
    if (!transport_->send_line(hello.dump())) {
        faults_ += 1;
        return false;
    }
    auto reply = transport_->read_line(timeout_ms_);
    if (!reply) {
        faults_ += 1;
        return false;
    }
    try {
        Json j = Json::parse(*reply);
        if (j.at("type").get<std::string>() != "hello") {
            faults_ += 1;
            return false;
        }
        const int version = j.at("protocol").get<int>();
        if (version != kAgentProtocolVersion)
            throw Error("protocol-version",
                        "agent speaks protocol " + std::to_string(version) + ", host speaks " +
                            std::to_string(kAgentProtocolVersion));
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        faults_ += 1;
        return false;
    }
    ready_ = true;
    return true;
}

std::vector<Decision> ExternalAgentScheduler::fallback(const TwinState& snapshot) {
    std::vector<Decision> decisions;
    for (const JobState* job : queued_in_order(snapshot))
        decisions.push_back(Decision::delay(job->spec.id));
    return decisions;
}

std::vector<Decision> ExternalAgentScheduler::decide(const TwinState& snapshot) {
    if (!ready_) {
        faults_ += 1;
        return fallback(snapshot);
    }
    Json request;
    request["type"] = "decide";
    request["snapshot"] = twin_to_json(snapshot);
    if (!transport_->send_line(request.dump())) {
        faults_ += 1;
        return fallback(snapshot);
    }
    auto reply = transport_->read_line(timeout_ms_);
    if (!reply) {
        faults_ += 1;
        return fallback(snapshot);
    }
    try {
        Json j = Json::parse(*reply);
        if (j.at("type").get<std::string>() != "decisions") {
            faults_ += 1;
            return fallback(snapshot);
        }
        std::vector<Decision> decisions;
        for (const auto& d : j.at("decisions")) decisions.push_back(decision_from_json(d));
        return decisions;
    } catch (const std::exception&) {
        faults_ += 1;
        return fallback(snapshot);
    }
}

} // namespace edgetwin::sched
