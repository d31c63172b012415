#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>

namespace driftwatch {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

/// Kinematic state of the vehicle. World frame is z-up; attitude maps body to world.
struct VehicleState {
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    Quat attitude = Quat::Identity();
    Vec3 body_rates = Vec3::Zero();

    bool is_finite() const;
};

/// Normalized actuation request: collective thrust in [0,1], torques in [-1,1].
struct ControlInput {
    double thrust = 0.0;
    Vec3 torque = Vec3::Zero();

    /// Returns a copy with every component clamped into range.
    ControlInput saturated() const;
    bool is_finite() const;
};

struct VehicleParams {
    double mass = 2.0;
    Vec3 inertia_diag{0.02, 0.02, 0.04};
    double max_thrust = 40.0;
    Vec3 max_torque{1.0, 1.0, 0.2};
    Vec3 drag_coeff_linear{0.1, 0.1, 0.15};
    double motor_time_constant = 0.05;
    double gravity = 9.81;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;

    double hover_thrust() const { return mass * gravity / max_thrust; }
};

using MotorCommands = std::array<double, 4>;

/// Filtered per-motor thrust level, normalized to [0,1] of per-motor maximum.
struct MotorState {
    MotorCommands level{0.0, 0.0, 0.0, 0.0};

    static MotorState steady(const MotorCommands& cmd) { return MotorState{cmd}; }
};

/// One-step rigid-body prediction used by the monitor: gravity, body-z thrust and
/// diagonal-inertia rotation, no drag and no motor lag.
///
/// Rates are advanced first and the attitude is integrated with the step-averaged
/// rate; the thrust direction is taken at the mid-step attitude, then velocity and
/// position are advanced under that constant acceleration.
VehicleState predict_step(const VehicleState& state, const ControlInput& input,
                          const VehicleParams& params, double dt);

/// Higher-fidelity plant: first-order motor lag, X-quad mixing and linear drag on
/// top of the same rigid-body update as predict_step.
struct PlantStepResult {
    VehicleState state;
    MotorState motors;
};

PlantStepResult plant_step(const VehicleState& state, const MotorCommands& motor_cmds,
                           const MotorState& motors, const VehicleParams& params, double dt);

/// Inverse X-quad mixer. Motor order: front-right, rear-left, front-left, rear-right
/// (body frame x forward, y left, z up). Output saturates to [0,1].
MotorCommands mix_motors(double thrust, const Vec3& torque);

/// Forward mixer: recovers normalized (thrust, torque) from per-motor levels.
ControlInput forward_mix(const MotorCommands& motors);

/// Unit quaternion for a rotation vector (axis * angle).
Quat quat_exp(const Vec3& rotation_vector);

/// Geodesic angle between two attitudes in [0, pi], insensitive to quaternion sign.
double attitude_angle(const Quat& a, const Quat& b);

/// Roll and pitch (radians) of a body-to-world attitude, ZYX convention.
double roll_of(const Quat& q);
double pitch_of(const Quat& q);

}  // namespace driftwatch
