#include "driftwatch/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <memory>
#include <stdexcept>

namespace driftwatch {

void InprocTransport::send(std::span<const std::uint8_t> bytes) {
    {
        std::lock_guard lock(mutex_);
        if (closed_) return;
        queue_.emplace_back(bytes.begin(), bytes.end());
    }
    ready_.notify_one();
}

std::optional<Datagram> InprocTransport::receive() {
    std::unique_lock lock(mutex_);
    ready_.wait(lock, [this] { return !queue_.empty() || closed_; });
    if (queue_.empty()) return std::nullopt;
    Datagram d = std::move(queue_.front());
    queue_.pop_front();
    return d;
}

void InprocTransport::close() {
    {
        std::lock_guard lock(mutex_);
        closed_ = true;
    }
    ready_.notify_all();
}

namespace {

[[noreturn]] void throw_errno(const char* what) {
    throw std::runtime_error(std::string(what) + ": " + std::strerror(errno));
}

}  // namespace

UdpTransport::UdpTransport(int fd, std::chrono::milliseconds idle_timeout)
    : fd_(fd), idle_timeout_(idle_timeout) {}

UdpTransport::UdpTransport(UdpTransport&& other) noexcept
    : fd_(other.fd_), idle_timeout_(other.idle_timeout_), closed_(other.closed_.load()),
      seen_any_(other.seen_any_) {
    other.fd_ = -1;
}

UdpTransport::~UdpTransport() {
    if (fd_ >= 0) ::close(fd_);
}

UdpTransport UdpTransport::receiver(std::uint16_t port, std::chrono::milliseconds idle_timeout) {
    const int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd < 0) throw_errno("socket");
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    const int rcvbuf = 1 << 20;
    ::setsockopt(fd, SOL_SOCKET, SO_RCVBUF, &rcvbuf, sizeof(rcvbuf));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(fd);
        throw_errno("bind");
    }
    return UdpTransport(fd, idle_timeout);
}

UdpTransport UdpTransport::sender(const std::string& host, std::uint16_t port) {
    const int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd < 0) throw_errno("socket");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        throw std::invalid_argument("invalid IPv4 address '" + host + "'");
    }
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(fd);
        throw_errno("connect");
    }
    return UdpTransport(fd, std::chrono::milliseconds(0));
}

std::uint16_t UdpTransport::local_port() const {
    sockaddr_in addr{};
    socklen_t len = sizeof(addr);
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) throw_errno("getsockname");
    return ntohs(addr.sin_port);
}

void UdpTransport::send(std::span<const std::uint8_t> bytes) {
    if (closed_) return;
    // loss is part of the UDP contract; the aligner accounts for it
    (void)::send(fd_, bytes.data(), bytes.size(), 0);
}

std::optional<Datagram> UdpTransport::receive() {
    constexpr int kPollMs = 50;
    auto idle_since = std::chrono::steady_clock::now();
    while (!closed_) {
        pollfd p{fd_, POLLIN, 0};
        const int ready = ::poll(&p, 1, kPollMs);
        if (ready < 0) {
            if (errno == EINTR) continue;
            throw_errno("poll");
        }
        if (ready == 0) {
            if (seen_any_ && std::chrono::steady_clock::now() - idle_since > idle_timeout_) {
                return std::nullopt;
            }
            continue;
        }
        Datagram d(2048);
        const ssize_t n = ::recv(fd_, d.data(), d.size(), 0);
        if (n < 0) {
            if (errno == EINTR || errno == EAGAIN) continue;
            throw_errno("recv");
        }
        d.resize(static_cast<std::size_t>(n));
        seen_any_ = true;
        return d;
    }
    return std::nullopt;
}

void UdpTransport::close() { closed_ = true; }

ReceiveStats receive_loop(Transport& transport, const Clock& clock, const FrameSink& sink) {
    ReceiveStats stats;
    while (auto datagram = transport.receive()) {
        const double now = clock();
        DecodeResult r = decode_frame(*datagram);
        if (!r) {
            ++stats.malformed;
            continue;
        }
        ++stats.received;
        sink(ReceivedFrame{*r.frame, now});
    }
    return stats;
}

Clock steady_clock_seconds() {
    const auto origin = std::chrono::steady_clock::now();
    return [origin] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - origin).count();
    };
}

Clock stepped_clock(double step) {
    auto ticks = std::make_shared<std::uint64_t>(0);
    return [ticks, step] { return static_cast<double>((*ticks)++) * step; };
}

}  // namespace driftwatch
