#include "driftwatch/sensors.hpp"

namespace driftwatch {

namespace {

Vec3 gaussian3(Rng& rng, double std) {
    if (std <= 0.0) return Vec3::Zero();
    std::normal_distribution<double> n(0.0, std);
    const double x = n(rng);
    const double y = n(rng);
    const double z = n(rng);
    return Vec3(x, y, z);
}

}  // namespace

ImuSample sense_imu(const VehicleState& truth, const VehicleState& prev_truth,
                    const VehicleParams& params, const NoiseConfig& noise, Rng& rng, double t,
                    double dt) {
    const Vec3 accel_world = (truth.velocity - prev_truth.velocity) / dt;
    const Vec3 specific_world = accel_world + Vec3(0.0, 0.0, params.gravity);

    ImuSample s;
    s.t = t;
    s.accel = truth.attitude.conjugate() * specific_world + gaussian3(rng, noise.accel_std);
    s.gyro = truth.body_rates + gaussian3(rng, noise.gyro_std);
    return s;
}

Vec3 sense_position(const VehicleState& truth, const NoiseConfig& noise, Rng& rng) {
    return truth.position + gaussian3(rng, noise.position_std);
}

}  // namespace driftwatch
