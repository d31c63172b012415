#include "driftwatch/residual.hpp"

#include <stdexcept>

namespace driftwatch {

ResidualDetector::ResidualDetector(double epsilon, double hold) : epsilon_(epsilon), hold_(hold) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("residual epsilon must be positive");
    if (!(hold >= 0.0)) throw std::invalid_argument("residual hold must be >= 0");
}

std::optional<double> ResidualDetector::update(double t, const Vec3& est, const Vec3& sp) {
    if (alert_) return std::nullopt;
    if ((est - sp).norm() <= epsilon_) {
        exceed_since_.reset();
        return std::nullopt;
    }
    if (!exceed_since_) exceed_since_ = t;
    if (t - *exceed_since_ >= hold_ - 1e-9) {
        alert_ = *exceed_since_ + hold_;
        return alert_;
    }
    return std::nullopt;
}

std::optional<double> residual_baseline_detect(const std::vector<ResidualSample>& samples,
                                               double epsilon, double hold) {
    ResidualDetector det(epsilon, hold);
    for (const ResidualSample& s : samples) {
        if (auto t = det.update(s.t, s.position_estimate, s.setpoint)) return t;
    }
    return std::nullopt;
}

}  // namespace driftwatch
