#include "driftwatch/config.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace driftwatch {

using nlohmann::json;

std::string_view to_string(TransportKind kind) {
    return kind == TransportKind::udp ? "udp" : "inproc";
}

namespace {

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError("field " + (path.empty() ? "<root>" : path) + ": expected an object");
    for (const auto& [key, _] : obj.items()) {
        const bool ok = std::any_of(allowed.begin(), allowed.end(),
                                    [&](const char* a) { return key == a; });
        if (!ok) throw ConfigError("field " + join(path, key) + ": unknown key");
    }
}

template <typename T>
void read(const json& obj, const std::string& path, const char* key, T& dst) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    try {
        dst = it->template get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("field " + join(path, key) + ": " + e.what());
    }
}

void read_vec3(const json& obj, const std::string& path, const char* key, Vec3& dst) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_array() || it->size() != 3) {
        throw ConfigError("field " + join(path, key) + ": expected an array of 3 numbers");
    }
    for (std::size_t i = 0; i < 3; ++i) {
        if (!(*it)[i].is_number()) {
            throw ConfigError("field " + join(path, key) + ": expected an array of 3 numbers");
        }
        dst[static_cast<Eigen::Index>(i)] = (*it)[i].get<double>();
    }
}

template <typename Fn>
void section(const json& root, const std::string& path, const char* key, Fn&& fn) {
    auto it = root.find(key);
    if (it == root.end()) return;
    fn(*it, join(path, key));
}

// Reports the 1-based line and column of a byte offset in text.
std::string locate(std::string_view text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

template <typename Fn>
void rethrow_as_field(const std::string& field, Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError("field " + field + ": " + e.what());
    }
}

}  // namespace

void RunConfig::validate() const {
    rethrow_as_field("scenario", [&] { build_scenario(scenario); });
    rethrow_as_field("attack", [&] { attack.validate(scenario.duration); });
    rethrow_as_field("sim", [&] { sim.validate(); });
    rethrow_as_field("monitor", [&] { monitor.validate(); });
    if (!(residual.epsilon > 0.0)) throw ConfigError("field monitor.residual_epsilon: must be positive");
    if (!(residual.hold >= 0.0)) throw ConfigError("field monitor.residual_hold: must be >= 0");
    if (!(udp_speedup > 0.0)) throw ConfigError("field transport.udp_speedup: must be positive");
}

RunConfig default_run_config(ScenarioLabel label) {
    RunConfig cfg;
    cfg.scenario = default_scenario_params(label);
    cfg.attack.kind = AttackKind::none;
    return cfg;
}

RunConfig parse_config(std::string_view text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error at " + locate(text, e.byte == 0 ? 0 : e.byte - 1) +
                          ": " + e.what());
    }
    reject_unknown(root, "", {"seed", "duration", "output_dir", "scenario", "attack", "vehicle",
                              "sim", "monitor", "instability", "transport"});

    ScenarioLabel label = ScenarioLabel::hover;
    if (auto it = root.find("scenario"); it != root.end() && it->contains("label")) {
        std::string text_label;
        read(*it, "scenario", "label", text_label);
        rethrow_as_field("scenario.label", [&] { label = parse_scenario_label(text_label); });
    }
    RunConfig cfg = default_run_config(label);

    read(root, "", "seed", cfg.seed);
    read(root, "", "output_dir", cfg.output_dir);

    section(root, "", "scenario", [&](const json& s, const std::string& p) {
        reject_unknown(s, p, {"label", "altitude", "duration", "side", "speed", "ramp_time", "distance"});
        read(s, p, "altitude", cfg.scenario.altitude);
        read(s, p, "duration", cfg.scenario.duration);
        read(s, p, "side", cfg.scenario.side);
        read(s, p, "speed", cfg.scenario.speed);
        read(s, p, "ramp_time", cfg.scenario.ramp_time);
        read(s, p, "distance", cfg.scenario.distance);
    });
    read(root, "", "duration", cfg.scenario.duration);

    section(root, "", "attack", [&](const json& a, const std::string& p) {
        reject_unknown(a, p, {"kind", "t_start", "accel_bias_rate", "gyro_bias_rate",
                              "bias_axis_mask", "jitter_probability", "jitter_delay_cycles",
                              "jitter_ramp", "seed"});
        if (a.contains("kind")) {
            std::string kind;
            read(a, p, "kind", kind);
            rethrow_as_field(p + ".kind", [&] { cfg.attack.kind = parse_attack_kind(kind); });
        }
        read(a, p, "t_start", cfg.attack.t_start);
        read_vec3(a, p, "accel_bias_rate", cfg.attack.accel_bias_rate);
        read_vec3(a, p, "gyro_bias_rate", cfg.attack.gyro_bias_rate);
        read(a, p, "bias_axis_mask", cfg.attack.bias_axis_mask);
        read(a, p, "jitter_probability", cfg.attack.jitter_probability);
        if (a.contains("jitter_delay_cycles")) {
            std::array<int, 2> range{};
            read(a, p, "jitter_delay_cycles", range);
            cfg.attack.jitter_delay_min = range[0];
            cfg.attack.jitter_delay_max = range[1];
        }
        read(a, p, "jitter_ramp", cfg.attack.jitter_ramp);
        read(a, p, "seed", cfg.attack.seed);
    });

    section(root, "", "vehicle", [&](const json& v, const std::string& p) {
        reject_unknown(v, p, {"mass", "inertia_diag", "max_thrust", "max_torque",
                              "drag_coeff_linear", "motor_time_constant", "gravity"});
        VehicleParams& vp = cfg.sim.vehicle;
        read(v, p, "mass", vp.mass);
        read_vec3(v, p, "inertia_diag", vp.inertia_diag);
        read(v, p, "max_thrust", vp.max_thrust);
        read_vec3(v, p, "max_torque", vp.max_torque);
        read_vec3(v, p, "drag_coeff_linear", vp.drag_coeff_linear);
        read(v, p, "motor_time_constant", vp.motor_time_constant);
        read(v, p, "gravity", vp.gravity);
    });

    section(root, "", "sim", [&](const json& s, const std::string& p) {
        reject_unknown(s, p, {"physics_dt", "steps_per_cycle", "steps_per_fix", "noise",
                              "estimator", "controller"});
        read(s, p, "physics_dt", cfg.sim.physics_dt);
        read(s, p, "steps_per_cycle", cfg.sim.steps_per_cycle);
        read(s, p, "steps_per_fix", cfg.sim.steps_per_fix);
        section(s, p, "noise", [&](const json& n, const std::string& q) {
            reject_unknown(n, q, {"accel_std", "gyro_std", "position_std"});
            read(n, q, "accel_std", cfg.sim.noise.accel_std);
            read(n, q, "gyro_std", cfg.sim.noise.gyro_std);
            read(n, q, "position_std", cfg.sim.noise.position_std);
        });
        section(s, p, "estimator", [&](const json& e, const std::string& q) {
            reject_unknown(e, q, {"tilt_gain", "position_gain", "velocity_gain"});
            read(e, q, "tilt_gain", cfg.sim.estimator.tilt_gain);
            read(e, q, "position_gain", cfg.sim.estimator.position_gain);
            read(e, q, "velocity_gain", cfg.sim.estimator.velocity_gain);
        });
        section(s, p, "controller", [&](const json& c, const std::string& q) {
            reject_unknown(c, q, {"position_p", "position_p_z", "velocity_p", "velocity_p_z",
                                  "velocity_i", "attitude_p", "yaw_p", "rate_p", "rate_p_yaw",
                                  "max_tilt", "max_horizontal_speed", "max_rate",
                                  "integral_limit"});
            ControllerGains& g = cfg.sim.gains;
            read(c, q, "position_p", g.position_p);
            read(c, q, "position_p_z", g.position_p_z);
            read(c, q, "velocity_p", g.velocity_p);
            read(c, q, "velocity_p_z", g.velocity_p_z);
            read(c, q, "velocity_i", g.velocity_i);
            read(c, q, "attitude_p", g.attitude_p);
            read(c, q, "yaw_p", g.yaw_p);
            read(c, q, "rate_p", g.rate_p);
            read(c, q, "rate_p_yaw", g.rate_p_yaw);
            read(c, q, "max_tilt", g.max_tilt);
            read(c, q, "max_horizontal_speed", g.max_horizontal_speed);
            read(c, q, "max_rate", g.max_rate);
            read(c, q, "integral_limit", g.integral_limit);
        });
    });
    cfg.sim.estimator.gravity = cfg.sim.vehicle.gravity;

    section(root, "", "monitor", [&](const json& m, const std::string& p) {
        reject_unknown(m, p, {"window", "alpha", "persistence", "weights", "gap_reset",
                              "calibration_skip", "min_calibration_samples", "residual_epsilon",
                              "residual_hold"});
        read(m, p, "window", cfg.monitor.window);
        read(m, p, "alpha", cfg.monitor.alpha);
        read(m, p, "persistence", cfg.monitor.persistence);
        read(m, p, "gap_reset", cfg.monitor.gap_reset);
        read(m, p, "calibration_skip", cfg.monitor.calibration_skip);
        read(m, p, "min_calibration_samples", cfg.monitor.min_calibration_samples);
        read(m, p, "residual_epsilon", cfg.residual.epsilon);
        read(m, p, "residual_hold", cfg.residual.hold);
        section(m, p, "weights", [&](const json& w, const std::string& q) {
            reject_unknown(w, q, {"w_pos", "w_vel", "w_att", "w_rate"});
            read(w, q, "w_pos", cfg.monitor.weights.w_pos);
            read(w, q, "w_vel", cfg.monitor.weights.w_vel);
            read(w, q, "w_att", cfg.monitor.weights.w_att);
            read(w, q, "w_rate", cfg.monitor.weights.w_rate);
        });
    });

    section(root, "", "instability", [&](const json& i, const std::string& p) {
        reject_unknown(i, p, {"position_error", "position_hold", "oscillation_peak_to_peak_deg",
                              "oscillation_window"});
        read(i, p, "position_error", cfg.instability.position_error);
        read(i, p, "position_hold", cfg.instability.position_hold);
        read(i, p, "oscillation_peak_to_peak_deg", cfg.instability.oscillation_peak_to_peak_deg);
        read(i, p, "oscillation_window", cfg.instability.oscillation_window);
    });

    section(root, "", "transport", [&](const json& t, const std::string& p) {
        reject_unknown(t, p, {"kind", "udp_port", "udp_speedup"});
        if (t.contains("kind")) {
            std::string kind;
            read(t, p, "kind", kind);
            if (kind == "inproc") {
                cfg.transport = TransportKind::inproc;
            } else if (kind == "udp") {
                cfg.transport = TransportKind::udp;
            } else {
                throw ConfigError("field transport.kind: expected 'inproc' or 'udp'");
            }
        }
        read(t, p, "udp_port", cfg.udp_port);
        read(t, p, "udp_speedup", cfg.udp_speedup);
    });

    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string dump_config(const RunConfig& c) {
    auto v3 = [](const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); };
    json j;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    j["scenario"] = {{"label", std::string(to_string(c.scenario.label))},
                     {"altitude", c.scenario.altitude},
                     {"duration", c.scenario.duration},
                     {"side", c.scenario.side},
                     {"speed", c.scenario.speed},
                     {"ramp_time", c.scenario.ramp_time},
                     {"distance", c.scenario.distance}};
    j["attack"] = {{"kind", std::string(to_string(c.attack.kind))},
                   {"t_start", c.attack.t_start},
                   {"accel_bias_rate", v3(c.attack.accel_bias_rate)},
                   {"gyro_bias_rate", v3(c.attack.gyro_bias_rate)},
                   {"bias_axis_mask", c.attack.bias_axis_mask},
                   {"jitter_probability", c.attack.jitter_probability},
                   {"jitter_delay_cycles", {c.attack.jitter_delay_min, c.attack.jitter_delay_max}},
                   {"jitter_ramp", c.attack.jitter_ramp},
                   {"seed", c.attack.seed}};
    const VehicleParams& vp = c.sim.vehicle;
    j["vehicle"] = {{"mass", vp.mass},
                    {"inertia_diag", v3(vp.inertia_diag)},
                    {"max_thrust", vp.max_thrust},
                    {"max_torque", v3(vp.max_torque)},
                    {"drag_coeff_linear", v3(vp.drag_coeff_linear)},
                    {"motor_time_constant", vp.motor_time_constant},
                    {"gravity", vp.gravity}};
    const ControllerGains& g = c.sim.gains;
    j["sim"] = {{"physics_dt", c.sim.physics_dt},
                {"steps_per_cycle", c.sim.steps_per_cycle},
                {"steps_per_fix", c.sim.steps_per_fix},
                {"noise",
                 {{"accel_std", c.sim.noise.accel_std},
                  {"gyro_std", c.sim.noise.gyro_std},
                  {"position_std", c.sim.noise.position_std}}},
                {"estimator",
                 {{"tilt_gain", c.sim.estimator.tilt_gain},
                  {"position_gain", c.sim.estimator.position_gain},
                  {"velocity_gain", c.sim.estimator.velocity_gain}}},
                {"controller",
                 {{"position_p", g.position_p},
                  {"position_p_z", g.position_p_z},
                  {"velocity_p", g.velocity_p},
                  {"velocity_p_z", g.velocity_p_z},
                  {"velocity_i", g.velocity_i},
                  {"attitude_p", g.attitude_p},
                  {"yaw_p", g.yaw_p},
                  {"rate_p", g.rate_p},
                  {"rate_p_yaw", g.rate_p_yaw},
                  {"max_tilt", g.max_tilt},
                  {"max_horizontal_speed", g.max_horizontal_speed},
                  {"max_rate", g.max_rate},
                  {"integral_limit", g.integral_limit}}}};
    j["monitor"] = {{"window", c.monitor.window},
                    {"alpha", c.monitor.alpha},
                    {"persistence", c.monitor.persistence},
                    {"gap_reset", c.monitor.gap_reset},
                    {"calibration_skip", c.monitor.calibration_skip},
                    {"min_calibration_samples", c.monitor.min_calibration_samples},
                    {"residual_epsilon", c.residual.epsilon},
                    {"residual_hold", c.residual.hold},
                    {"weights",
                     {{"w_pos", c.monitor.weights.w_pos},
                      {"w_vel", c.monitor.weights.w_vel},
                      {"w_att", c.monitor.weights.w_att},
                      {"w_rate", c.monitor.weights.w_rate}}}};
    j["instability"] = {{"position_error", c.instability.position_error},
                        {"position_hold", c.instability.position_hold},
                        {"oscillation_peak_to_peak_deg", c.instability.oscillation_peak_to_peak_deg},
                        {"oscillation_window", c.instability.oscillation_window}};
    j["transport"] = {{"kind", std::string(to_string(c.transport))},
                      {"udp_port", c.udp_port},
                      {"udp_speedup", c.udp_speedup}};
    return j.dump(2);
}

}  // namespace driftwatch
