#include "dualpass/wire.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

#include "dualpass/errors.hpp"

namespace dualpass {

namespace {

void write_all(int fd, const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
        ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n <= 0) {
            raise(Errc::io_error, "socket write failed");
        }
        off += std::size_t(n);
    }
}

void write_line(int fd, const nlohmann::ordered_json& j) {
    write_all(fd, j.dump() + "\n");
}

} // namespace

std::pair<std::string, int> parse_listen_addr(const std::string& addr) {
    auto colon = addr.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= addr.size()) {
        raise(Errc::invalid_argument, "listen address must be host:port");
    }
    std::string host = addr.substr(0, colon);
    int port = 0;
    for (char c : addr.substr(colon + 1)) {
        if (c < '0' || c > '9') {
            raise(Errc::invalid_argument, "listen port must be numeric");
        }
        port = port * 10 + (c - '0');
        if (port > 65535) {
            raise(Errc::invalid_argument, "listen port out of range");
        }
    }
    return {host, port};
}

WireServer::WireServer(AuthService& service, const std::string& listen_addr,
                       std::ostream* log)
    : service_(service), log_(log) {
    auto [host, port] = parse_listen_addr(listen_addr);
    host_ = host;
    requested_port_ = port;
}

WireServer::~WireServer() {
    stop();
}

void WireServer::log_line(const std::string& line) {
    if (log_) {
        std::lock_guard<std::mutex> lock(mutex_);
        *log_ << line << "\n";
        log_->flush();
    }
}

void WireServer::start() {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) {
        raise(Errc::io_error, "cannot create socket");
    }
    int yes = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(std::uint16_t(requested_port_));
    if (::inet_pton(AF_INET, host_.c_str(), &addr.sin_addr) != 1) {
        raise(Errc::invalid_argument, "listen host must be an IPv4 address");
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        raise(Errc::io_error, std::string("bind failed: ") + std::strerror(errno));
    }
    if (::listen(listen_fd_, 16) != 0) {
        raise(Errc::io_error, std::string("listen failed: ") + std::strerror(errno));
    }
    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);

    running_ = true;
    accept_thread_ = std::thread([this] { accept_loop(); });
}

void WireServer::stop() {
    if (!running_.exchange(false)) {
        return;
    }
    int listener = listen_fd_.exchange(-1);
    if (listener >= 0) {
        ::shutdown(listener, SHUT_RDWR);
        ::close(listener);
    }
    {
        std::lock_guard<std::mutex> lock(mutex_);
        for (int fd : open_fds_) {
            ::shutdown(fd, SHUT_RDWR);
        }
    }
    if (accept_thread_.joinable()) {
        accept_thread_.join();
    }
    std::vector<std::thread> threads;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        threads.swap(connection_threads_);
    }
    for (auto& t : threads) {
        if (t.joinable()) {
            t.join();
        }
    }
}

void WireServer::accept_loop() {
    while (running_) {
        int listener = listen_fd_.load();
        if (listener < 0) {
            break;
        }
        sockaddr_in peer{};
        socklen_t len = sizeof(peer);
        int fd = ::accept(listener, reinterpret_cast<sockaddr*>(&peer), &len);
        if (fd < 0) {
            if (running_) {
                continue;
            }
            break;
        }
        int conn_id = ++conn_counter_;
        log_line("[conn " + std::to_string(conn_id) + "] connected");
        std::lock_guard<std::mutex> lock(mutex_);
        open_fds_.insert(fd);
        connection_threads_.emplace_back(
            [this, fd, conn_id] { serve_connection(fd, conn_id); });
    }
}

void WireServer::serve_connection(int fd, int conn_id) {
    std::string session_id;
    std::string buffer;
    char chunk[4096];
    while (true) {
        ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
        if (n <= 0) {
            break;
        }
        buffer.append(chunk, std::size_t(n));
        std::size_t pos;
        while ((pos = buffer.find('\n')) != std::string::npos) {
            std::string line = buffer.substr(0, pos);
            buffer.erase(0, pos + 1);
            if (line.empty()) {
                continue;
            }
            nlohmann::json request;
            bool parsed = true;
            try {
                request = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception&) {
                parsed = false;
            }
            bool peer_gone = false;
            if (!parsed) {
                nlohmann::ordered_json err;
                err["status"] = "error";
                err["error"] = errc_name(Errc::protocol_error);
                err["message"] = "line is not valid json";
                log_line("[conn " + std::to_string(conn_id) + "] unparseable line");
                std::lock_guard<std::mutex> lock(mutex_);
                try {
                    write_line(fd, err);
                } catch (const Error&) {
                    peer_gone = true;
                }
                if (peer_gone) {
                    break;
                }
                continue;
            }
            std::string type = request.is_object() && request.contains("type") &&
                                       request["type"].is_string()
                                   ? request["type"].get<std::string>()
                                   : "?";
            std::string status;
            {
                // one lock covers the service call and every socket write, so
                // pushed lines never interleave with responses and a target fd
                // cannot be closed or recycled mid-write
                std::lock_guard<std::mutex> lock(mutex_);
                AuthService::Handled handled =
                    service_.handle_message(session_id, request);
                if (!handled.new_session_id.empty()) {
                    session_id = handled.new_session_id;
                    session_fds_[session_id] = fd;
                }
                status = handled.response.contains("status")
                             ? handled.response["status"].get<std::string>()
                             : "?";
                try {
                    write_line(fd, handled.response);
                } catch (const Error&) {
                    peer_gone = true;
                }
                for (auto& [target_session, message] : handled.pushes) {
                    auto it = session_fds_.find(target_session);
                    if (it == session_fds_.end()) {
                        continue;
                    }
                    try {
                        write_line(it->second, message);
                    } catch (const Error&) {
                        // the push target vanished; its own thread cleans up
                    }
                }
            }
            log_line("[conn " + std::to_string(conn_id) + "] " + type + " -> " + status);
            if (peer_gone) {
                break;
            }
        }
    }
    {
        std::lock_guard<std::mutex> lock(mutex_);
        if (!session_id.empty()) {
            session_fds_.erase(session_id);
            service_.close_session(session_id);
        }
        open_fds_.erase(fd);
        ::close(fd);
    }
    log_line("[conn " + std::to_string(conn_id) + "] closed");
}

WireClient WireClient::connect(const std::string& host, int port) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) {
        raise(Errc::io_error, "cannot create socket");
    }
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(std::uint16_t(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        raise(Errc::invalid_argument, "server host must be an IPv4 address");
    }
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(fd);
        raise(Errc::io_error, "cannot connect to " + host + ":" + std::to_string(port) +
                                  ": " + std::strerror(errno));
    }
    return WireClient(fd);
}

WireClient::~WireClient() {
    if (fd_ >= 0) {
        ::close(fd_);
    }
}

WireClient::WireClient(WireClient&& other) noexcept
    : fd_(other.fd_), buffer_(std::move(other.buffer_)),
      capture_(std::move(other.capture_)), next_request_(other.next_request_) {
    other.fd_ = -1;
}

void WireClient::send(const nlohmann::json& message) {
    send_raw_line(message.dump());
}

void WireClient::send_raw_line(const std::string& line) {
    std::string framed = line + "\n";
    capture_.push_back(framed);
    write_all(fd_, framed);
}

nlohmann::json WireClient::recv(int timeout_ms) {
    while (true) {
        std::size_t pos = buffer_.find('\n');
        if (pos != std::string::npos) {
            std::string line = buffer_.substr(0, pos);
            buffer_.erase(0, pos + 1);
            capture_.push_back(line + "\n");
            return nlohmann::json::parse(line);
        }
        pollfd pfd{fd_, POLLIN, 0};
        int ready = ::poll(&pfd, 1, timeout_ms);
        if (ready == 0) {
            raise(Errc::io_error, "timed out waiting for the server");
        }
        if (ready < 0) {
            raise(Errc::io_error, "poll failed");
        }
        char chunk[4096];
        ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
        if (n <= 0) {
            raise(Errc::io_error, "server closed the connection");
        }
        buffer_.append(chunk, std::size_t(n));
    }
}

nlohmann::json WireClient::call(nlohmann::json message, int timeout_ms) {
    if (!message.contains("request_id")) {
        message["request_id"] = "r" + std::to_string(++next_request_);
    }
    send(message);
    return recv(timeout_ms);
}

} // namespace dualpass
