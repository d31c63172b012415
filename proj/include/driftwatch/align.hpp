#pragma once

#include "driftwatch/transport.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace driftwatch {

/// One control cycle reconstructed from telemetry: x_t, u_t and the following state.
struct CycleTriple {
    std::uint32_t seq = 0;
    double t = 0.0;   // sender time of x_t, seconds
    double dt = 0.0;  // sender time between x_t and x_next, seconds
    VehicleState x_t;
    ControlInput u_t;
    VehicleState x_next;
};

struct AlignerConfig {
    double nominal_period = 0.02;
    double max_period_factor = 5.0;  // dt must lie in (0, factor * nominal_period]
    std::size_t reorder_window = 8;  // frames buffered ahead of an incomplete cycle
    double stale_after = 0.5;        // seconds of receive time
};

struct AlignerStats {
    std::uint64_t triples = 0;
    std::uint64_t gaps = 0;        // cycles skipped because a frame never arrived
    std::uint64_t late_drops = 0;  // frames for cycles already emitted or skipped
    std::uint64_t stale_drops = 0; // frames evicted by receive-time staleness
    std::uint64_t bad_dt = 0;      // complete cycles rejected for an out-of-range dt
    std::uint64_t duplicates = 0;
};

/// Pairs STATE(n), CONTROL(n) and STATE(n+1) by sender sequence number. Out-of-order
/// frames are buffered; a cycle that cannot be completed is skipped, never synthesized.
class CycleAligner {
public:
    explicit CycleAligner(AlignerConfig cfg = {});

    std::vector<CycleTriple> push(const ReceivedFrame& rf);
    /// End of stream: emits what can be completed and counts the rest as gaps.
    std::vector<CycleTriple> flush();

    const AlignerStats& stats() const { return stats_; }

private:
    void drain(std::vector<CycleTriple>& out, bool final);
    bool try_emit(std::vector<CycleTriple>& out);
    std::size_t frames_ahead() const;
    bool cursor_stale() const;
    void skip_cursor();

    AlignerConfig cfg_;
    std::map<std::uint32_t, ReceivedFrame> states_;
    std::map<std::uint32_t, ReceivedFrame> controls_;
    std::optional<std::uint32_t> cursor_;
    double newest_recv_ = 0.0;
    AlignerStats stats_;
};

/// Convenience for whole recordings.
std::vector<CycleTriple> align_cycles(const std::vector<ReceivedFrame>& frames,
                                      const AlignerConfig& cfg, AlignerStats* stats = nullptr);

}  // namespace driftwatch
