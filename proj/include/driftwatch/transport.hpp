#pragma once

#include "driftwatch/frame.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace driftwatch {

using Datagram = std::vector<std::uint8_t>;

/// Datagram channel between the simulator and the monitor.
class Transport {
public:
    virtual ~Transport() = default;
    virtual void send(std::span<const std::uint8_t> bytes) = 0;
    /// Blocks for the next datagram; std::nullopt once the transport is closed and drained.
    virtual std::optional<Datagram> receive() = 0;
    virtual void close() = 0;
};

/// In-process queue. Single producer, single consumer; deterministic ordering.
class InprocTransport final : public Transport {
public:
    void send(std::span<const std::uint8_t> bytes) override;
    std::optional<Datagram> receive() override;
    void close() override;

private:
    std::mutex mutex_;
    std::condition_variable ready_;
    std::deque<Datagram> queue_;
    bool closed_ = false;
};

/// UDP datagrams over IPv4. A receiver binds `port`; a sender targets host:port.
class UdpTransport final : public Transport {
public:
    static UdpTransport receiver(std::uint16_t port,
                                 std::chrono::milliseconds idle_timeout = std::chrono::seconds(2));
    static UdpTransport sender(const std::string& host, std::uint16_t port);

    UdpTransport(UdpTransport&& other) noexcept;
    UdpTransport& operator=(UdpTransport&&) = delete;
    UdpTransport(const UdpTransport&) = delete;
    ~UdpTransport() override;

    void send(std::span<const std::uint8_t> bytes) override;
    /// Returns std::nullopt after close() or once no datagram has arrived for
    /// idle_timeout after the first one.
    std::optional<Datagram> receive() override;
    void close() override;

    std::uint16_t local_port() const;

private:
    UdpTransport(int fd, std::chrono::milliseconds idle_timeout);

    int fd_ = -1;
    std::chrono::milliseconds idle_timeout_;
    std::atomic<bool> closed_{false};
    bool seen_any_ = false;
};

struct ReceivedFrame {
    TelemetryFrame frame;
    double recv_time = 0.0;
};

struct ReceiveStats {
    std::uint64_t received = 0;
    std::uint64_t malformed = 0;
};

using Clock = std::function<double()>;
using FrameSink = std::function<void(const ReceivedFrame&)>;

/// Drains a transport, stamping each decoded frame with clock() on arrival.
/// Malformed datagrams are counted and skipped.
ReceiveStats receive_loop(Transport& transport, const Clock& clock, const FrameSink& sink);

/// Monotonic wall clock in seconds.
Clock steady_clock_seconds();

/// Deterministic clock that advances by `step` seconds on every reading.
Clock stepped_clock(double step);

}  // namespace driftwatch
