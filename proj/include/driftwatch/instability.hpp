#pragma once

#include <optional>

namespace driftwatch {

struct SimTrace;

/// Ground-truth instability onset. Either the true position tracking error exceeds
/// position_error for position_hold seconds (onset at the end of the hold), or roll or
/// pitch swings more than oscillation_peak_to_peak_deg within oscillation_window.
struct InstabilityCriteria {
    double position_error = 0.5;
    double position_hold = 1.0;
    double oscillation_peak_to_peak_deg = 10.0;
    double oscillation_window = 1.0;
};

std::optional<double> detect_instability(const SimTrace& trace,
                                         const InstabilityCriteria& criteria = {});

}  // namespace driftwatch
