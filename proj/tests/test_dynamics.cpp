#include "driftwatch/dynamics.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace driftwatch;
using namespace driftwatch::oracle;

namespace {

VehicleState tilted_state() {
    VehicleState s;
    s.position = Vec3(1.0, 2.0, 3.0);
    s.velocity = Vec3(0.5, -0.3, 0.2);
    s.attitude = quat_exp(Vec3(0.3, -0.2, 0.1));
    s.body_rates = Vec3(1.0, -0.5, 0.8);
    return s;
}

ControlInput tilted_input() {
    ControlInput u;
    u.thrust = 0.6;
    u.torque = Vec3(0.2, -0.1, 0.3);
    return u;
}

void expect_states_equal(const VehicleState& a, const VehicleState& b, double tol) {
    EXPECT_LE((a.position - b.position).cwiseAbs().maxCoeff(), tol);
    EXPECT_LE((a.velocity - b.velocity).cwiseAbs().maxCoeff(), tol);
    EXPECT_LE((a.attitude.coeffs() - b.attitude.coeffs()).cwiseAbs().maxCoeff(), tol);
    EXPECT_LE((a.body_rates - b.body_rates).cwiseAbs().maxCoeff(), tol);
}

}  // namespace

// Oracle output for the tilted case, recorded once with 1000 sub-steps.
TEST(SubstepOracle, MatchesFrozenValues) {
    const VehicleState o = substep_oracle(tilted_state(), tilted_input(), VehicleParams{}, 0.02, 1000);
    EXPECT_NEAR(o.position.x(), 1.0095607435073353, 1e-12);
    EXPECT_NEAR(o.position.y(), 1.9932564266595081, 1e-12);
    EXPECT_NEAR(o.position.z(), 3.004277188626491, 1e-12);
    EXPECT_NEAR(o.velocity.x(), 0.45576699448139379, 1e-12);
    EXPECT_NEAR(o.velocity.y(), -0.37522302100622401, 1e-12);
    EXPECT_NEAR(o.velocity.z(), 0.22736661829945853, 1e-12);
    EXPECT_NEAR(o.attitude.w(), 0.9798518786609125, 1e-12);
    EXPECT_NEAR(o.attitude.x(), 0.15938208939634879, 1e-12);
    EXPECT_NEAR(o.attitude.y(), -0.10547707792177162, 1e-12);
    EXPECT_NEAR(o.attitude.z(), 0.057984752283847849, 1e-12);
    EXPECT_NEAR(o.body_rates.x(), 1.2, 1e-12);
    EXPECT_NEAR(o.body_rates.y(), -0.6, 1e-12);
    EXPECT_NEAR(o.body_rates.z(), 0.83, 1e-12);
}

TEST(PredictStep, HoverIsEquilibrium) {
    VehicleParams p;
    VehicleState s;
    s.position = Vec3(3.0, -1.0, 5.0);
    ControlInput u;
    u.thrust = p.hover_thrust();
    const VehicleState out = predict_step(s, u, p, 0.02);
    expect_states_equal(out, s, 1e-15);
}

TEST(PredictStep, FreeFall) {
    VehicleState s;
    const VehicleState out = predict_step(s, ControlInput{}, VehicleParams{}, 0.02);
    EXPECT_NEAR(out.velocity.z(), -0.1962, 1e-15);
    EXPECT_EQ(out.velocity.x(), 0.0);
    EXPECT_EQ(out.velocity.y(), 0.0);
    EXPECT_EQ(out.body_rates, Vec3::Zero());
    EXPECT_NEAR(attitude_angle(out.attitude, s.attitude), 0.0, 1e-15);
}

TEST(PredictStep, TiltedCaseWithinOracleTolerance) {
    const VehicleState ref = substep_oracle(tilted_state(), tilted_input(), VehicleParams{}, 0.02, 1000);
    const VehicleState got = predict_step(tilted_state(), tilted_input(), VehicleParams{}, 0.02);
    EXPECT_LE(max_rel_err(got, ref), 1e-3);
}

TEST(PredictStep, RandomEnvelopeWithinOracleTolerance) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> dts(0.001, 0.02);
    const VehicleParams p;
    double worst = 0.0;
    for (int i = 0; i < 300; ++i) {
        VehicleState s;
        s.position = 10.0 * Vec3(unit(rng), unit(rng), unit(rng));
        s.velocity = 5.0 * Vec3(unit(rng), unit(rng), unit(rng));
        Vec3 axis(unit(rng), unit(rng), 0.0);
        if (axis.norm() < 1e-3) axis = Vec3::UnitX();
        const double tilt = 0.5236 * std::abs(unit(rng));
        s.attitude = quat_exp(Vec3(0.0, 0.0, 3.0 * unit(rng))) * quat_exp(axis.normalized() * tilt);
        Vec3 rates(unit(rng), unit(rng), unit(rng));
        s.body_rates = rates.normalized() * 2.0 * std::abs(unit(rng));
        ControlInput u;
        u.thrust = 0.5 * (unit(rng) + 1.0);
        u.torque = Vec3(unit(rng), unit(rng), unit(rng));
        // keep the end-of-step rates inside the envelope as well
        const double dt = dts(rng);
        const Vec3 end_rates = s.body_rates + u.torque.cwiseProduct(p.max_torque).cwiseQuotient(p.inertia_diag) * dt;
        if (end_rates.norm() > 2.0) u.torque *= 0.0;
        const VehicleState ref = substep_oracle(s, u, p, dt, 1000);
        worst = std::max(worst, max_rel_err(predict_step(s, u, p, dt), ref));
    }
    EXPECT_LE(worst, 1e-3);
}

TEST(PredictStep, RejectsBadInputs) {
    const VehicleParams p;
    EXPECT_THROW(predict_step(VehicleState{}, ControlInput{}, p, 0.0), std::invalid_argument);
    EXPECT_THROW(predict_step(VehicleState{}, ControlInput{}, p, -0.01), std::invalid_argument);
    EXPECT_THROW(predict_step(VehicleState{}, ControlInput{}, p, NAN), std::invalid_argument);
    VehicleState bad;
    bad.velocity.x() = NAN;
    EXPECT_THROW(predict_step(bad, ControlInput{}, p, 0.02), std::invalid_argument);
    ControlInput u;
    u.torque.y() = INFINITY;
    EXPECT_THROW(predict_step(VehicleState{}, u, p, 0.02), std::invalid_argument);
}

TEST(PredictStep, QuaternionStaysNormalized) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    VehicleState s;
    const VehicleParams p;
    for (int i = 0; i < 2000; ++i) {
        ControlInput u;
        u.thrust = 0.5;
        u.torque = 0.1 * Vec3(unit(rng), unit(rng), unit(rng));
        s = predict_step(s, u, p, 0.02);
        s.body_rates = s.body_rates.cwiseMax(Vec3::Constant(-2.0)).cwiseMin(Vec3::Constant(2.0));
        ASSERT_NEAR(s.attitude.norm(), 1.0, 1e-9);
    }
}

TEST(PredictStep, Deterministic) {
    const VehicleState a = predict_step(tilted_state(), tilted_input(), VehicleParams{}, 0.02);
    const VehicleState b = predict_step(tilted_state(), tilted_input(), VehicleParams{}, 0.02);
    EXPECT_EQ(a.position, b.position);
    EXPECT_EQ(a.velocity, b.velocity);
    EXPECT_EQ(a.attitude.coeffs(), b.attitude.coeffs());
    EXPECT_EQ(a.body_rates, b.body_rates);
}

TEST(PlantStep, HoverHoldsFor1000Steps) {
    VehicleParams p;
    const MotorCommands cmd = mix_motors(p.hover_thrust(), Vec3::Zero());
    VehicleState s;
    s.position = Vec3(0.0, 0.0, 5.0);
    MotorState m = MotorState::steady(cmd);
    for (int i = 0; i < 1000; ++i) {
        const PlantStepResult r = plant_step(s, cmd, m, p, 0.004);
        s = r.state;
        m = r.motors;
    }
    EXPECT_LT((s.position - Vec3(0.0, 0.0, 5.0)).norm(), 1e-6);
}

TEST(PlantStep, CoincidesWithPredictorWhenFidelityLayersOff) {
    VehicleParams p;
    p.motor_time_constant = 0.0;
    p.drag_coeff_linear = Vec3::Zero();
    const VehicleState s = tilted_state();
    const MotorCommands cmd = mix_motors(0.55, Vec3(0.05, -0.04, 0.02));
    const PlantStepResult r = plant_step(s, cmd, MotorState{}, p, 0.004);
    const VehicleState pred = predict_step(s, forward_mix(cmd), p, 0.004);
    expect_states_equal(r.state, pred, 1e-12);
}

TEST(PlantStep, SymmetricCommandsMatchPredictor) {
    VehicleParams p;
    p.motor_time_constant = 0.0;
    p.drag_coeff_linear = Vec3::Zero();
    const MotorCommands cmd{0.6, 0.6, 0.6, 0.6};
    ControlInput u;
    u.thrust = 0.6;
    const PlantStepResult r = plant_step(tilted_state(), cmd, MotorState{}, p, 0.02);
    expect_states_equal(r.state, predict_step(tilted_state(), u, p, 0.02), 1e-12);
}

TEST(PlantStep, MotorLagFollowsFirstOrderResponse) {
    VehicleParams p;
    const double tau = 0.05, dt = 0.004;
    p.motor_time_constant = tau;
    const MotorCommands cmd{1.0, 1.0, 1.0, 1.0};
    MotorState m;
    VehicleState s;
    const int steps = static_cast<int>(std::lround(tau / dt * 4.0));
    for (int i = 1; i <= steps; ++i) {
        const PlantStepResult r = plant_step(s, cmd, m, p, dt);
        m = r.motors;
        const double t = i * dt;
        EXPECT_NEAR(m.level[0], 1.0 - std::exp(-t / tau), 0.02) << "t=" << t;
    }
}

TEST(PlantStep, EnergyConservedInFreeFlight) {
    VehicleParams p;
    p.drag_coeff_linear = Vec3::Zero();
    VehicleState s;
    s.position = Vec3(0.0, 0.0, 20.0);
    s.velocity = Vec3(3.0, -2.0, 4.0);
    s.attitude = quat_exp(Vec3(0.2, 0.1, 0.0));
    const MotorCommands off{0.0, 0.0, 0.0, 0.0};
    auto energy = [&](const VehicleState& x) {
        return 0.5 * p.mass * x.velocity.squaredNorm() + p.mass * p.gravity * x.position.z();
    };
    const double e0 = energy(s);
    MotorState m;
    for (int i = 0; i < 500; ++i) {
        const PlantStepResult r = plant_step(s, off, m, p, 0.004);
        s = r.state;
        m = r.motors;
        ASSERT_NEAR(energy(s), e0, 0.005 * std::abs(e0));
    }
}

TEST(PlantStep, RejectsBadInputs) {
    const VehicleParams p;
    EXPECT_THROW(plant_step(VehicleState{}, MotorCommands{}, MotorState{}, p, 0.0), std::invalid_argument);
    EXPECT_THROW(plant_step(VehicleState{}, MotorCommands{NAN, 0, 0, 0}, MotorState{}, p, 0.004),
                 std::invalid_argument);
}

TEST(Mixer, Examples) {
    for (double m : mix_motors(0.5, Vec3::Zero())) EXPECT_EQ(m, 0.5);
    for (double m : mix_motors(0.0, Vec3::Zero())) EXPECT_EQ(m, 0.0);
}

TEST(Mixer, RoundTripWithSlack) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const double thrust = 0.3 + 0.4 * (unit(rng) + 1.0) / 2.0;
        const Vec3 torque = 0.09 * Vec3(unit(rng), unit(rng), unit(rng));
        const ControlInput back = forward_mix(mix_motors(thrust, torque));
        ASSERT_NEAR(back.thrust, thrust, 1e-12);
        ASSERT_LE((back.torque - torque).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Mixer, Saturates) {
    for (double m : mix_motors(2.0, Vec3(5.0, -5.0, 5.0))) {
        EXPECT_GE(m, 0.0);
        EXPECT_LE(m, 1.0);
    }
}

TEST(Mixer, PositiveRollRaisesLeftMotors) {
    const MotorCommands m = mix_motors(0.5, Vec3(0.2, 0.0, 0.0));
    EXPECT_GT(m[1], m[0]);  // rear-left above front-right
    EXPECT_GT(m[2], m[3]);  // front-left above rear-right
}

TEST(Attitude, AngleIgnoresQuaternionSign) {
    const Quat q = quat_exp(Vec3(0.3, -0.4, 0.5));
    const Quat neg(-q.w(), -q.x(), -q.y(), -q.z());
    EXPECT_NEAR(attitude_angle(q, neg), 0.0, 1e-12);
    EXPECT_NEAR(attitude_angle(Quat::Identity(), quat_exp(Vec3(0.0, 0.0, 0.7))), 0.7, 1e-12);
}

TEST(VehicleParamsTest, ValidateNamesField) {
    VehicleParams p;
    p.mass = -1.0;
    try {
        p.validate();
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("mass"), std::string::npos);
    }
}
