#include "driftwatch/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace driftwatch {

namespace {

bool finite3(const Vec3& v) { return v.allFinite(); }

void require_step_inputs(const VehicleState& state, const VehicleParams& params, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument("dt must be positive and finite");
    }
    if (!state.is_finite()) {
        throw std::invalid_argument("vehicle state contains non-finite values");
    }
    params.validate();
}

// Shared rigid-body update. thrust_n in newtons along body z, torque_nm in body frame,
// extra_force in world frame.
VehicleState integrate_rigid_body(const VehicleState& s, double thrust_n, const Vec3& torque_nm,
                                  const Vec3& extra_force, const VehicleParams& p, double dt) {
    VehicleState out;

    const Vec3 angular_accel = torque_nm.cwiseQuotient(p.inertia_diag);
    out.body_rates = s.body_rates + angular_accel * dt;

    const Vec3 mean_rate = 0.5 * (s.body_rates + out.body_rates);
    out.attitude = (s.attitude * quat_exp(mean_rate * dt)).normalized();

    // rotation accumulated over the first half of the step
    const Vec3 half_rotation = s.body_rates * (0.5 * dt) + angular_accel * (dt * dt / 8.0);
    const Quat mid = (s.attitude * quat_exp(half_rotation)).normalized();

    const Vec3 accel = mid * Vec3(0.0, 0.0, thrust_n / p.mass) - Vec3(0.0, 0.0, p.gravity) +
                       extra_force / p.mass;
    out.velocity = s.velocity + accel * dt;
    out.position = s.position + s.velocity * dt + 0.5 * accel * dt * dt;
    return out;
}

}  // namespace

bool VehicleState::is_finite() const {
    return finite3(position) && finite3(velocity) && attitude.coeffs().allFinite() &&
           finite3(body_rates);
}

ControlInput ControlInput::saturated() const {
    ControlInput out;
    out.thrust = std::clamp(thrust, 0.0, 1.0);
    for (int i = 0; i < 3; ++i) out.torque[i] = std::clamp(torque[i], -1.0, 1.0);
    return out;
}

bool ControlInput::is_finite() const { return std::isfinite(thrust) && torque.allFinite(); }

void VehicleParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument(std::string("vehicle.") + name + " must be positive");
        }
    };
    positive(mass, "mass");
    positive(max_thrust, "max_thrust");
    positive(gravity, "gravity");
    for (int i = 0; i < 3; ++i) {
        positive(inertia_diag[i], "inertia_diag");
        positive(max_torque[i], "max_torque");
        if (!(drag_coeff_linear[i] >= 0.0) || !std::isfinite(drag_coeff_linear[i])) {
            throw std::invalid_argument("vehicle.drag_coeff_linear must be non-negative");
        }
    }
    if (!(motor_time_constant >= 0.0) || !std::isfinite(motor_time_constant)) {
        throw std::invalid_argument("vehicle.motor_time_constant must be non-negative");
    }
}

VehicleState predict_step(const VehicleState& state, const ControlInput& input,
                          const VehicleParams& params, double dt) {
    require_step_inputs(state, params, dt);
    if (!input.is_finite()) throw std::invalid_argument("control input contains non-finite values");

    const ControlInput u = input.saturated();
    return integrate_rigid_body(state, u.thrust * params.max_thrust,
                                u.torque.cwiseProduct(params.max_torque), Vec3::Zero(), params, dt);
}

PlantStepResult plant_step(const VehicleState& state, const MotorCommands& motor_cmds,
                           const MotorState& motors, const VehicleParams& params, double dt) {
    require_step_inputs(state, params, dt);
    for (double c : motor_cmds) {
        if (!std::isfinite(c)) throw std::invalid_argument("motor command is non-finite");
    }

    PlantStepResult out;
    // exact discretization of a first-order lag under a held command
    const double blend = params.motor_time_constant > 0.0
                             ? 1.0 - std::exp(-dt / params.motor_time_constant)
                             : 1.0;
    for (std::size_t i = 0; i < 4; ++i) {
        const double cmd = std::clamp(motor_cmds[i], 0.0, 1.0);
        out.motors.level[i] = motors.level[i] + (cmd - motors.level[i]) * blend;
    }

    const ControlInput effective = forward_mix(out.motors.level);
    const Vec3 drag = -params.drag_coeff_linear.cwiseProduct(state.velocity);
    out.state = integrate_rigid_body(state, effective.thrust * params.max_thrust,
                                     effective.torque.cwiseProduct(params.max_torque), drag,
                                     params, dt);
    return out;
}

MotorCommands mix_motors(double thrust, const Vec3& torque) {
    const double r = torque.x(), p = torque.y(), y = torque.z();
    MotorCommands m{
        thrust + 0.5 * (-r - p + y),  // front-right
        thrust + 0.5 * (r + p + y),   // rear-left
        thrust + 0.5 * (r - p - y),   // front-left
        thrust + 0.5 * (-r + p - y),  // rear-right
    };
    for (double& v : m) v = std::clamp(v, 0.0, 1.0);
    return m;
}

ControlInput forward_mix(const MotorCommands& m) {
    ControlInput u;
    u.thrust = 0.25 * (m[0] + m[1] + m[2] + m[3]);
    u.torque = Vec3(0.5 * (-m[0] + m[1] + m[2] - m[3]),
                    0.5 * (-m[0] + m[1] - m[2] + m[3]),
                    0.5 * (m[0] + m[1] - m[2] - m[3]));
    return u;
}

Quat quat_exp(const Vec3& rv) {
    const double angle = rv.norm();
    if (angle < 1e-12) {
        return Quat(1.0, 0.5 * rv.x(), 0.5 * rv.y(), 0.5 * rv.z()).normalized();
    }
    const double s = std::sin(0.5 * angle) / angle;
    return Quat(std::cos(0.5 * angle), rv.x() * s, rv.y() * s, rv.z() * s);
}

double attitude_angle(const Quat& a, const Quat& b) {
    const Quat rel = a.normalized().conjugate() * b.normalized();
    return 2.0 * std::atan2(rel.vec().norm(), std::abs(rel.w()));
}

double roll_of(const Quat& q) {
    return std::atan2(2.0 * (q.w() * q.x() + q.y() * q.z()),
                      1.0 - 2.0 * (q.x() * q.x() + q.y() * q.y()));
}

double pitch_of(const Quat& q) {
    return std::asin(std::clamp(2.0 * (q.w() * q.y() - q.z() * q.x()), -1.0, 1.0));
}

}  // namespace driftwatch
