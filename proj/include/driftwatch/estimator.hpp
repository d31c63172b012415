#pragma once

#include "driftwatch/dynamics.hpp"
#include "driftwatch/sensors.hpp"

#include <optional>

namespace driftwatch {

struct EstimatorState {
    VehicleState estimate;
    Vec3 accel_bias = Vec3::Zero();
    Vec3 gyro_bias = Vec3::Zero();
};

/// Strapdown propagation aided only by position fixes. Each fix innovation e corrects
/// position and velocity, and tilts the attitude about z x e: a horizontal position
/// error is the integral of an acceleration error, which for a level vehicle is mostly
/// tilt. No gravity reference is used, so sustained manoeuvres do not bias the tilt.
///
/// The defaults place the three error poles at -1 rad/s for 10 Hz fixes.
struct EstimatorConfig {
    double position_gain = 0.3;    // per fix
    double velocity_gain = 0.3;    // 1/s per fix
    double tilt_gain = 0.0102;     // rad/m per fix
    double gravity = 9.81;
};

/// One propagation step at the IMU rate, optionally followed by a position correction.
EstimatorState estimator_step(const EstimatorState& est, const ImuSample& imu,
                              const std::optional<Vec3>& pos_fix, const EstimatorConfig& cfg,
                              double dt);

}  // namespace driftwatch
