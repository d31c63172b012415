#include "driftwatch/simulator.hpp"

#include "driftwatch/instability.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace driftwatch {

namespace {

constexpr double kArenaLimit = 1.0e4;

bool escaped(const VehicleState& s) {
    return !s.is_finite() || s.position.cwiseAbs().maxCoeff() > kArenaLimit;
}

std::size_t cycle_count(const ScenarioScript& script, double period) {
    return static_cast<std::size_t>(std::llround(script.duration() / period)) + 1;
}

}  // namespace

void SimConfig::validate() const {
    vehicle.validate();
    gains.validate();
    if (!(physics_dt > 0.0)) throw std::invalid_argument("sim.physics_dt must be positive");
    if (steps_per_cycle < 1) throw std::invalid_argument("sim.steps_per_cycle must be >= 1");
    if (steps_per_fix < 1) throw std::invalid_argument("sim.steps_per_fix must be >= 1");
    if (noise.accel_std < 0.0 || noise.gyro_std < 0.0 || noise.position_std < 0.0) {
        throw std::invalid_argument("noise standard deviations must be >= 0");
    }
}

SimTrace run_scenario(const ScenarioScript& script, const AttackSchedule& attack,
                      const SimConfig& cfg, std::uint64_t seed, const CycleSink& sink) {
    cfg.validate();
    const double period = cfg.cycle_period();
    const double dt = cfg.physics_dt;
    const std::size_t n_cycles = cycle_count(script, period);
    attack.validate(static_cast<double>(n_cycles) * period);

    const std::vector<int> delays = jitter_plan(attack, n_cycles, period);

    Rng rng(seed);
    VehicleState truth;
    truth.position = script.start();
    const double hover = cfg.vehicle.hover_thrust();
    MotorState motors = MotorState::steady(mix_motors(hover, Vec3::Zero()));

    EstimatorState est;
    est.estimate = truth;

    CascadeController controller(cfg.vehicle, cfg.gains);
    std::vector<ControlInput> computed;
    computed.reserve(n_cycles);

    SimTrace trace;
    trace.cycle_period = period;
    trace.rows.reserve(n_cycles);

    for (std::size_t n = 0; n < n_cycles; ++n) {
        const double t = static_cast<double>(n) * period;
        const Setpoint sp = script.setpoint_at(t);
        const ControlInput u = controller.step(est.estimate, sp, period);
        computed.push_back(u);

        const std::size_t lag = static_cast<std::size_t>(delays[n]);
        const ControlInput applied = computed[n >= lag ? n - lag : 0];

        TraceRow row;
        row.seq = static_cast<std::uint32_t>(n);
        row.t = t;
        row.truth = truth;
        row.estimate = est.estimate;
        row.control = u;
        row.applied = applied;
        row.setpoint = sp;
        trace.rows.push_back(row);
        if (sink) sink(row);

        if (n + 1 == n_cycles) break;

        const MotorCommands cmds = mix_motors(applied.thrust, applied.torque);
        for (int k = 0; k < cfg.steps_per_cycle; ++k) {
            const std::size_t step = n * static_cast<std::size_t>(cfg.steps_per_cycle) +
                                     static_cast<std::size_t>(k) + 1;
            const double t_next = static_cast<double>(step) * dt;

            const PlantStepResult r = plant_step(truth, cmds, motors, cfg.vehicle, dt);
            if (escaped(r.state)) {
                trace.diverged_at = t_next;
                trace.diagnostic = "vehicle state diverged at t=" + std::to_string(t_next) + " s";
                break;
            }
            ImuSample imu = sense_imu(r.state, truth, cfg.vehicle, cfg.noise, rng, t_next, dt);
            imu = corrupt_imu(imu, attack);
            std::optional<Vec3> fix;
            if (step % static_cast<std::size_t>(cfg.steps_per_fix) == 0) {
                fix = sense_position(r.state, cfg.noise, rng);
            }
            truth = r.state;
            motors = r.motors;
            est = estimator_step(est, imu, fix, cfg.estimator, dt);
            if (escaped(est.estimate)) {
                trace.diverged_at = t_next;
                trace.diagnostic = "estimate diverged at t=" + std::to_string(t_next) + " s";
                break;
            }
        }
        if (trace.diverged_at) break;
    }

    trace.instability_onset = detect_instability(trace);
    return trace;
}

SimTrace run_ideal_loop(const ScenarioScript& script, const SimConfig& cfg) {
    cfg.validate();
    const double period = cfg.cycle_period();
    const std::size_t n_cycles = cycle_count(script, period);

    VehicleState truth;
    truth.position = script.start();
    CascadeController controller(cfg.vehicle, cfg.gains);

    SimTrace trace;
    trace.cycle_period = period;
    trace.rows.reserve(n_cycles);
    for (std::size_t n = 0; n < n_cycles; ++n) {
        const double t = static_cast<double>(n) * period;
        const Setpoint sp = script.setpoint_at(t);
        const ControlInput u = controller.step(truth, sp, period);

        TraceRow row;
        row.seq = static_cast<std::uint32_t>(n);
        row.t = t;
        row.truth = truth;
        row.estimate = truth;
        row.control = u;
        row.applied = u;
        row.setpoint = sp;
        trace.rows.push_back(row);

        truth = predict_step(truth, u, cfg.vehicle, period);
    }
    trace.instability_onset = detect_instability(trace);
    return trace;
}

}  // namespace driftwatch
