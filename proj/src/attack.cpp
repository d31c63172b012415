#include "driftwatch/attack.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace driftwatch {

std::string_view to_string(AttackKind kind) {
    switch (kind) {
        case AttackKind::none: return "none";
        case AttackKind::imu_bias_drift: return "imu-bias-drift";
        case AttackKind::timing_jitter: return "timing-jitter";
    }
    return "unknown";
}

AttackKind parse_attack_kind(std::string_view text) {
    if (text == "none") return AttackKind::none;
    if (text == "imu-bias-drift") return AttackKind::imu_bias_drift;
    if (text == "timing-jitter") return AttackKind::timing_jitter;
    throw std::invalid_argument("unknown attack kind '" + std::string(text) + "'");
}

void AttackSchedule::validate(double run_end) const {
    if (!(t_start >= 0.0) || !std::isfinite(t_start)) {
        throw std::invalid_argument("attack.t_start must be >= 0");
    }
    if (!(jitter_probability >= 0.0 && jitter_probability <= 1.0)) {
        throw std::invalid_argument("attack.jitter_probability must be in [0,1]");
    }
    if (jitter_delay_min < 0 || jitter_delay_max < jitter_delay_min) {
        throw std::invalid_argument("attack.jitter_delay must satisfy 0 <= min <= max");
    }
    if (!(jitter_ramp >= 0.0)) throw std::invalid_argument("attack.jitter_ramp must be >= 0");
    if (!accel_bias_rate.allFinite() || !gyro_bias_rate.allFinite()) {
        throw std::invalid_argument("attack bias rates must be finite");
    }
    if (kind == AttackKind::imu_bias_drift) {
        AttackSchedule probe = *this;
        const double end_bias = bias_at(probe, std::max(run_end, t_start)).accel.norm();
        if (end_bias > kMaxAccelBias) {
            throw std::invalid_argument("attack.accel_bias_rate reaches " +
                                        std::to_string(end_bias) +
                                        " m/s^2 by end of run (limit 1.0)");
        }
    }
}

BiasPair bias_at(const AttackSchedule& s, double t) {
    BiasPair b;
    if (s.kind != AttackKind::imu_bias_drift) return b;
    const double elapsed = std::max(0.0, t - s.t_start);
    for (int i = 0; i < 3; ++i) {
        if (!s.bias_axis_mask[static_cast<std::size_t>(i)]) continue;
        b.accel[i] = s.accel_bias_rate[i] * elapsed;
        b.gyro[i] = s.gyro_bias_rate[i] * elapsed;
    }
    return b;
}

ImuSample corrupt_imu(const ImuSample& sample, const AttackSchedule& schedule) {
    if (schedule.kind != AttackKind::imu_bias_drift) return sample;
    const BiasPair b = bias_at(schedule, sample.t);
    ImuSample out = sample;
    out.accel += b.accel;
    out.gyro += b.gyro;
    return out;
}

std::vector<int> jitter_plan(const AttackSchedule& s, std::size_t n_cycles, double period) {
    std::vector<int> delays(n_cycles, 0);
    if (s.kind != AttackKind::timing_jitter || s.jitter_probability <= 0.0) return delays;

    Rng rng(s.seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<int> delay(s.jitter_delay_min, s.jitter_delay_max);
    for (std::size_t i = 0; i < n_cycles; ++i) {
        // draw for every cycle so the plan prefix does not depend on n_cycles
        const double c = coin(rng);
        const int d = delay(rng);
        const double t = static_cast<double>(i) * period;
        if (t < s.t_start) continue;
        double p = s.jitter_probability;
        if (s.jitter_ramp > 0.0) p *= std::min(1.0, (t - s.t_start) / s.jitter_ramp);
        if (c < p) delays[i] = d;
    }
    return delays;
}

}  // namespace driftwatch
