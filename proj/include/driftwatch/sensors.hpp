#pragma once

#include "driftwatch/dynamics.hpp"

#include <random>

namespace driftwatch {

struct ImuSample {
    Vec3 accel = Vec3::Zero();  // specific force, body frame, m/s^2
    Vec3 gyro = Vec3::Zero();   // body rates, rad/s
    double t = 0.0;
};

struct NoiseConfig {
    double accel_std = 0.03;
    double gyro_std = 0.001;
    double position_std = 0.02;
};

using Rng = std::mt19937_64;

/// Clean IMU sample from two consecutive true states dt apart. Acceleration is the
/// finite difference of true velocity; the accelerometer reads it minus gravity,
/// rotated into the body frame.
ImuSample sense_imu(const VehicleState& truth, const VehicleState& prev_truth,
                    const VehicleParams& params, const NoiseConfig& noise, Rng& rng, double t,
                    double dt);

/// Noisy position fix standing in for GNSS/baro corrections.
Vec3 sense_position(const VehicleState& truth, const NoiseConfig& noise, Rng& rng);

}  // namespace driftwatch
