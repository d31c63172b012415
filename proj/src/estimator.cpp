#include "driftwatch/estimator.hpp"

#include <cmath>
#include <stdexcept>

namespace driftwatch {

EstimatorState estimator_step(const EstimatorState& est, const ImuSample& imu,
                              const std::optional<Vec3>& pos_fix, const EstimatorConfig& cfg,
                              double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
    if (!imu.accel.allFinite() || !imu.gyro.allFinite() || !est.estimate.is_finite()) {
        throw std::invalid_argument("estimator input contains non-finite values");
    }
    if (pos_fix && !pos_fix->allFinite()) {
        throw std::invalid_argument("position fix contains non-finite values");
    }

    EstimatorState out = est;
    VehicleState& x = out.estimate;

    const Vec3 rate = imu.gyro - est.gyro_bias;
    const Vec3 specific = imu.accel - est.accel_bias;

    x.attitude = (x.attitude * quat_exp(rate * dt)).normalized();
    x.body_rates = rate;

    const Vec3 accel = x.attitude * specific - Vec3(0.0, 0.0, cfg.gravity);
    x.position += x.velocity * dt + 0.5 * accel * dt * dt;
    x.velocity += accel * dt;

    if (pos_fix) {
        const Vec3 innovation = *pos_fix - x.position;
        x.position += cfg.position_gain * innovation;
        x.velocity += cfg.velocity_gain * innovation;
        const Vec3 tilt = cfg.tilt_gain * Vec3::UnitZ().cross(innovation);
        x.attitude = (quat_exp(tilt) * x.attitude).normalized();
    }
    return out;
}

}  // namespace driftwatch
