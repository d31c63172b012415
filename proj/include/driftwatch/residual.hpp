#pragma once

#include "driftwatch/dynamics.hpp"

#include <optional>
#include <vector>

namespace driftwatch {

/// Conventional residual check used for comparison: alerts when the estimated
/// position stays farther than epsilon from its setpoint for `hold` seconds.
class ResidualDetector {
public:
    ResidualDetector(double epsilon, double hold);

    /// Feeds one sample; returns the alert time on the sample that completes the hold.
    std::optional<double> update(double t, const Vec3& position_estimate, const Vec3& setpoint);

    const std::optional<double>& alert_time() const { return alert_; }

private:
    double epsilon_;
    double hold_;
    std::optional<double> exceed_since_;
    std::optional<double> alert_;
};

struct ResidualSample {
    double t = 0.0;
    Vec3 position_estimate = Vec3::Zero();
    Vec3 setpoint = Vec3::Zero();
};

std::optional<double> residual_baseline_detect(const std::vector<ResidualSample>& samples,
                                               double epsilon, double hold);

}  // namespace driftwatch
