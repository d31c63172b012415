#pragma once

#include "driftwatch/dynamics.hpp"

namespace driftwatch {

struct Setpoint {
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    Vec3 acceleration = Vec3::Zero();
    double yaw = 0.0;
};

/// Gains of the position -> velocity -> acceleration -> attitude -> rate cascade.
/// The rate gain is a bandwidth (1/s); it is scaled by inertia / max_torque.
struct ControllerGains {
    double position_p = 0.9;
    double position_p_z = 1.0;
    double velocity_p = 1.8;
    double velocity_p_z = 2.5;
    double velocity_i = 0.2;
    double attitude_p = 5.0;
    double yaw_p = 2.0;
    double rate_p = 10.0;
    double rate_p_yaw = 4.0;
    double max_tilt = 0.6;          // rad
    double max_horizontal_speed = 12.0;
    double max_rate = 3.0;          // rad/s
    double integral_limit = 2.0;    // m/s^2

    void validate() const;
};

/// Cascade P/PI/P/P controller. Holds the velocity integrator between calls.
class CascadeController {
public:
    CascadeController(VehicleParams params, ControllerGains gains);

    ControlInput step(const VehicleState& est, const Setpoint& sp, double dt);
    void reset();

    const ControllerGains& gains() const { return gains_; }

private:
    VehicleParams params_;
    ControllerGains gains_;
    Vec3 velocity_integral_ = Vec3::Zero();
};

/// Stateless single evaluation with a zero integrator.
ControlInput controller_step(const VehicleState& est, const Setpoint& sp,
                             const VehicleParams& params, const ControllerGains& gains, double dt);

}  // namespace driftwatch
