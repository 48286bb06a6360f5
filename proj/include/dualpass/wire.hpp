#pragma once

#include <atomic>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "dualpass/authserver.hpp"

namespace dualpass {

/// "host:port" -> (host, port). Throws on malformed addresses.
std::pair<std::string, int> parse_listen_addr(const std::string& addr);

/// Line-delimited JSON server over TCP. One session per connection,
/// created by the client's hello; all service calls are serialized.
class WireServer {
public:
    WireServer(AuthService& service, const std::string& listen_addr,
               std::ostream* log = nullptr);
    ~WireServer();

    WireServer(const WireServer&) = delete;
    WireServer& operator=(const WireServer&) = delete;

    void start();
    void stop();

    int port() const { return port_; }

private:
    void accept_loop();
    void serve_connection(int fd, int conn_id);
    void log_line(const std::string& line);

    AuthService& service_;
    std::string host_;
    int requested_port_;
    int port_ = 0;
    std::atomic<int> listen_fd_{-1};
    std::ostream* log_;
    std::thread accept_thread_;
    std::atomic<bool> running_{false};

    std::mutex mutex_; // guards service_, fd maps, client threads list
    std::map<std::string, int> session_fds_;
    std::set<int> open_fds_;
    std::vector<std::thread> connection_threads_;
    std::atomic<int> conn_counter_{0};
};

/// Blocking NDJSON client. Keeps a raw capture of everything sent and
/// received, which the hygiene tests scan.
class WireClient {
public:
    static WireClient connect(const std::string& host, int port);
    ~WireClient();

    WireClient(WireClient&& other) noexcept;
    WireClient& operator=(WireClient&&) = delete;
    WireClient(const WireClient&) = delete;

    void send(const nlohmann::json& message);

    /// Ships an arbitrary line; for protocol-abuse tests.
    void send_raw_line(const std::string& line);

    /// Reads one line; timeout_ms < 0 blocks indefinitely. Throws
    /// Errc::io_error on timeout or closed connection.
    nlohmann::json recv(int timeout_ms = -1);

    /// send + recv convenience with an auto-assigned request id.
    nlohmann::json call(nlohmann::json message, int timeout_ms = 10000);

    const std::vector<std::string>& capture() const { return capture_; }

private:
    explicit WireClient(int fd) : fd_(fd) {}

    int fd_ = -1;
    std::string buffer_;
    std::vector<std::string> capture_;
    int next_request_ = 0;
};

} // namespace dualpass
