#include "driftwatch/controller.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace driftwatch {

void ControllerGains::validate() const {
    const double values[] = {position_p, position_p_z, velocity_p, velocity_p_z, attitude_p,
                             yaw_p,      rate_p,       rate_p_yaw, max_tilt,     max_horizontal_speed,
                             max_rate,   integral_limit};
    for (double v : values) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("controller gains must be positive");
        }
    }
    if (!(velocity_i >= 0.0)) throw std::invalid_argument("controller.velocity_i must be >= 0");
}

CascadeController::CascadeController(VehicleParams params, ControllerGains gains)
    : params_(params), gains_(gains) {
    params_.validate();
    gains_.validate();
}

void CascadeController::reset() { velocity_integral_.setZero(); }

ControlInput CascadeController::step(const VehicleState& est, const Setpoint& sp, double dt) {
    const ControllerGains& g = gains_;
    const double gravity = params_.gravity;

    // position -> velocity
    Vec3 vel_sp = sp.velocity + Vec3(g.position_p, g.position_p, g.position_p_z)
                                    .cwiseProduct(sp.position - est.position);
    const double h_speed = vel_sp.head<2>().norm();
    if (h_speed > g.max_horizontal_speed) {
        vel_sp.head<2>() *= g.max_horizontal_speed / h_speed;
    }

    // velocity -> acceleration
    const Vec3 vel_err = vel_sp - est.velocity;
    velocity_integral_ += g.velocity_i * vel_err * dt;
    for (int i = 0; i < 3; ++i) {
        velocity_integral_[i] =
            std::clamp(velocity_integral_[i], -g.integral_limit, g.integral_limit);
    }
    const Vec3 accel_sp = sp.acceleration +
                          Vec3(g.velocity_p, g.velocity_p, g.velocity_p_z).cwiseProduct(vel_err) +
                          velocity_integral_;

    // acceleration -> thrust vector, with tilt limit
    Vec3 force = accel_sp + Vec3(0.0, 0.0, gravity);
    force.z() = std::max(force.z(), 0.2 * gravity);
    const double max_h = force.z() * std::tan(g.max_tilt);
    const double h = force.head<2>().norm();
    if (h > max_h) force.head<2>() *= max_h / h;

    const Vec3 body_z = est.attitude * Vec3::UnitZ();
    const double thrust_n = params_.mass * force.dot(body_z);

    // desired attitude from thrust direction and yaw
    const Vec3 z_des = force.normalized();
    const Vec3 x_course(std::cos(sp.yaw), std::sin(sp.yaw), 0.0);
    Vec3 y_des = z_des.cross(x_course);
    if (y_des.norm() < 1e-6) y_des = Vec3::UnitY();
    y_des.normalize();
    const Vec3 x_des = y_des.cross(z_des);
    Eigen::Matrix3d r_des;
    r_des.col(0) = x_des;
    r_des.col(1) = y_des;
    r_des.col(2) = z_des;
    const Quat q_des(r_des);

    // attitude -> rates
    Quat q_err = est.attitude.conjugate() * q_des;
    if (q_err.w() < 0.0) q_err.coeffs() *= -1.0;
    Vec3 rate_sp = 2.0 * Vec3(g.attitude_p, g.attitude_p, g.yaw_p).cwiseProduct(q_err.vec());
    for (int i = 0; i < 3; ++i) rate_sp[i] = std::clamp(rate_sp[i], -g.max_rate, g.max_rate);

    // rates -> torque
    const Vec3 alpha_des = Vec3(g.rate_p, g.rate_p, g.rate_p_yaw).cwiseProduct(rate_sp - est.body_rates);
    ControlInput u;
    u.thrust = thrust_n / params_.max_thrust;
    u.torque = params_.inertia_diag.cwiseProduct(alpha_des).cwiseQuotient(params_.max_torque);
    return u.saturated();
}

ControlInput controller_step(const VehicleState& est, const Setpoint& sp,
                             const VehicleParams& params, const ControllerGains& gains, double dt) {
    CascadeController c(params, gains);
    return c.step(est, sp, dt);
}

}  // namespace driftwatch
