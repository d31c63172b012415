#pragma once

#include "driftwatch/sensors.hpp"

#include <array>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace driftwatch {

enum class AttackKind { none, imu_bias_drift, timing_jitter };

std::string_view to_string(AttackKind kind);
AttackKind parse_attack_kind(std::string_view text);

/// Degradation schedule. Bias ramps linearly from t_start; jitter delays control
/// application by a whole number of control cycles with a per-cycle probability.
struct AttackSchedule {
    AttackKind kind = AttackKind::none;
    double t_start = 10.0;
    Vec3 accel_bias_rate{0.002, 0.0, 0.0};  // m/s^2 per s
    Vec3 gyro_bias_rate{0.0005, 0.0, 0.0};  // rad/s per s
    std::array<bool, 3> bias_axis_mask{true, false, false};
    double jitter_probability = 1.0;
    int jitter_delay_min = 2;
    int jitter_delay_max = 6;
    // Seconds over which the jitter probability rises linearly from 0 to
    // jitter_probability after t_start. Zero applies the full probability at once.
    double jitter_ramp = 30.0;
    std::uint64_t seed = 42;

    /// Throws std::invalid_argument. run_end bounds the accel bias envelope check.
    void validate(double run_end) const;
};

/// Largest accelerometer bias magnitude a schedule may reach within a run.
inline constexpr double kMaxAccelBias = 1.0;

struct BiasPair {
    Vec3 accel = Vec3::Zero();
    Vec3 gyro = Vec3::Zero();
};

BiasPair bias_at(const AttackSchedule& schedule, double t);

ImuSample corrupt_imu(const ImuSample& sample, const AttackSchedule& schedule);

/// Per-cycle delay (in cycles) for n_cycles control cycles of length period.
std::vector<int> jitter_plan(const AttackSchedule& schedule, std::size_t n_cycles,
                             double period = 0.02);

}  // namespace driftwatch
