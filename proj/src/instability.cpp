#include "driftwatch/instability.hpp"

#include "driftwatch/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace driftwatch {

namespace {

constexpr double kTimeEps = 1e-9;

std::optional<double> position_onset(const SimTrace& trace, const InstabilityCriteria& c) {
    std::optional<double> run_start;
    for (const TraceRow& row : trace.rows) {
        const double err = (row.truth.position - row.setpoint.position).norm();
        if (err > c.position_error) {
            if (!run_start) run_start = row.t;
            if (row.t - *run_start >= c.position_hold - kTimeEps) return *run_start + c.position_hold;
        } else {
            run_start.reset();
        }
    }
    return std::nullopt;
}

std::optional<double> oscillation_onset(const SimTrace& trace, const InstabilityCriteria& c) {
    const double limit = c.oscillation_peak_to_peak_deg * std::numbers::pi / 180.0;
    const auto& rows = trace.rows;
    std::size_t first = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        while (rows[i].t - rows[first].t > c.oscillation_window + kTimeEps) ++first;
        double roll_lo = INFINITY, roll_hi = -INFINITY, pitch_lo = INFINITY, pitch_hi = -INFINITY;
        for (std::size_t j = first; j <= i; ++j) {
            const double r = roll_of(rows[j].truth.attitude);
            const double p = pitch_of(rows[j].truth.attitude);
            roll_lo = std::min(roll_lo, r);
            roll_hi = std::max(roll_hi, r);
            pitch_lo = std::min(pitch_lo, p);
            pitch_hi = std::max(pitch_hi, p);
        }
        if (roll_hi - roll_lo > limit || pitch_hi - pitch_lo > limit) return rows[i].t;
    }
    return std::nullopt;
}

}  // namespace

std::optional<double> detect_instability(const SimTrace& trace, const InstabilityCriteria& c) {
    std::optional<double> onset = position_onset(trace, c);
    const std::optional<double> osc = oscillation_onset(trace, c);
    if (osc && (!onset || *osc < *onset)) onset = osc;
    if (trace.diverged_at && (!onset || *trace.diverged_at < *onset)) onset = trace.diverged_at;
    return onset;
}

}  // namespace driftwatch
