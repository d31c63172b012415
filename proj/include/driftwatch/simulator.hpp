#pragma once

#include "driftwatch/attack.hpp"
#include "driftwatch/controller.hpp"
#include "driftwatch/estimator.hpp"
#include "driftwatch/scenario.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace driftwatch {

struct SimConfig {
    VehicleParams vehicle;
    NoiseConfig noise;
    EstimatorConfig estimator;
    ControllerGains gains;
    double physics_dt = 0.004;     // 250 Hz
    int steps_per_cycle = 5;       // control + telemetry at 50 Hz
    int steps_per_fix = 25;        // position fixes at 10 Hz

    double cycle_period() const { return physics_dt * steps_per_cycle; }
    void validate() const;
};

/// One telemetry cycle of a run. `control` is what the controller computed (and what
/// telemetry reports); `applied` is what reached the mixer after any injected delay.
struct TraceRow {
    std::uint32_t seq = 0;
    double t = 0.0;
    VehicleState truth;
    VehicleState estimate;
    ControlInput control;
    ControlInput applied;
    Setpoint setpoint;
};

struct SimTrace {
    std::vector<TraceRow> rows;
    std::optional<double> instability_onset;
    /// Set when the vehicle state went non-finite or left the arena.
    std::optional<double> diverged_at;
    std::string diagnostic;
    double cycle_period = 0.02;
};

using CycleSink = std::function<void(const TraceRow&)>;

/// Closed-loop run: plant at physics_dt, IMU + estimator every physics step, the
/// cascade controller once per cycle. Deterministic for (script, attack, cfg, seed).
SimTrace run_scenario(const ScenarioScript& script, const AttackSchedule& attack,
                      const SimConfig& cfg, std::uint64_t seed, const CycleSink& sink = {});

/// Loop closed around predict_step itself at the cycle period, with the controller
/// fed ground truth. Used to check that the monitor sees zero model gap.
SimTrace run_ideal_loop(const ScenarioScript& script, const SimConfig& cfg);

}  // namespace driftwatch
