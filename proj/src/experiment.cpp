#include "driftwatch/experiment.hpp"

#include "driftwatch/residual.hpp"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace driftwatch {

using nlohmann::json;

namespace {

std::uint64_t to_us(double t) { return static_cast<std::uint64_t>(std::llround(t * 1e6)); }

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<double>();
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void fill_report(const RunConfig& cfg, RunOutcome& out) {
    RunReport& r = out.report;
    r.run_id = run_id_for(cfg);
    r.scenario = std::string(to_string(cfg.scenario.label));
    r.attack = std::string(to_string(cfg.attack.kind));
    r.seed = cfg.seed;
    r.instability_onset = out.trace.instability_onset;
    r.diagnostic = out.trace.diagnostic;

    if (out.alert) {
        r.alert_time = out.alert->t;
        r.alert_sd = out.alert->sd;
        r.false_positive = cfg.attack.kind == AttackKind::none;
        if (r.instability_onset) r.lead_time = *r.instability_onset - out.alert->t;

        std::vector<double> errors;
        for (const TraceRow& row : out.trace.rows) {
            if (row.t > out.alert->t) break;
            errors.push_back((row.truth.position - row.setpoint.position).norm());
        }
        if (!errors.empty()) {
            r.position_error_at_alert = errors.back();
            r.max_position_error_at_alert = *std::max_element(errors.begin(), errors.end());
            r.median_position_error_at_alert = median_of(errors);
        }
    }

    ResidualDetector residual(cfg.residual.epsilon, cfg.residual.hold);
    for (const TraceRow& row : out.trace.rows) {
        if (row.seq >= out.telemetry_seen.size() || !(out.telemetry_seen[row.seq] & 1u)) continue;
        residual.update(row.t, out.telemetry_states[row.seq].position, row.setpoint.position);
    }
    r.residual_alert_time = residual.alert_time();

    double sum = 0.0, sq = 0.0, mx = 0.0;
    std::size_t n = 0;
    for (const DriftRecord& rec : out.records) {
        if (!rec.sd) continue;
        sum += *rec.sd;
        sq += *rec.sd * *rec.sd;
        mx = std::max(mx, *rec.sd);
        ++n;
    }
    r.sd.count = n;
    if (n > 0) {
        r.sd.mean = sum / static_cast<double>(n);
        r.sd.stddev = std::sqrt(std::max(0.0, sq / static_cast<double>(n) - r.sd.mean * r.sd.mean));
        r.sd.max = mx;
    }
}

}  // namespace

std::string run_id_for(const RunConfig& cfg) {
    return std::string(to_string(cfg.scenario.label)) + "-" +
           std::string(to_string(cfg.attack.kind)) + "-s" + std::to_string(cfg.seed);
}

AttackSchedule effective_attack(const RunConfig& cfg) {
    AttackSchedule a = cfg.attack;
    a.seed ^= cfg.seed * 0x9E3779B97F4A7C15ULL;
    return a;
}

RunOutcome run_experiment(const RunConfig& cfg, const std::optional<BaselineModel>& baseline) {
    cfg.validate();
    const ScenarioScript script = build_scenario(cfg.scenario);
    const AttackSchedule attack = effective_attack(cfg);
    const double period = cfg.sim.cycle_period();

    RunOutcome out;
    out.config_json = dump_config(cfg);
    AlignerConfig acfg;
    acfg.nominal_period = period;
    CycleAligner aligner(acfg);
    MonitorPipeline pipeline(cfg.monitor, cfg.sim.vehicle, baseline);

    auto on_frame = [&](const ReceivedFrame& rf) {
        const std::uint32_t seq = rf.frame.seq;
        if (seq >= out.telemetry_seen.size()) {
            out.telemetry_seen.resize(seq + 1, 0);
            out.telemetry_states.resize(seq + 1);
            out.telemetry_controls.resize(seq + 1);
        }
        if (rf.frame.type == MsgType::state) {
            out.telemetry_states[seq] = state_from_frame(rf.frame);
            out.telemetry_seen[seq] |= 1u;
        } else {
            out.telemetry_controls[seq] = control_from_frame(rf.frame);
            out.telemetry_seen[seq] |= 2u;
        }
        for (const CycleTriple& tr : aligner.push(rf)) pipeline.process(tr);
    };

    auto publish = [](Transport& tx, const TraceRow& row) {
        const std::uint64_t t_us = to_us(row.t);
        tx.send(encode_frame(make_state_frame(row.seq, t_us, row.estimate)));
        tx.send(encode_frame(make_control_frame(row.seq, t_us, row.control)));
    };

    ReceiveStats rstats;
    if (cfg.transport == TransportKind::inproc) {
        InprocTransport link;
        out.trace = run_scenario(script, attack, cfg.sim, cfg.seed,
                                 [&](const TraceRow& row) { publish(link, row); });
        link.close();
        // two frames per cycle arrive half a period apart on the simulated receive clock
        rstats = receive_loop(link, stepped_clock(0.5 * period), on_frame);
    } else {
        UdpTransport rx = UdpTransport::receiver(cfg.udp_port);
        std::thread monitor([&] { rstats = receive_loop(rx, steady_clock_seconds(), on_frame); });
        try {
            UdpTransport tx = UdpTransport::sender("127.0.0.1", rx.local_port());
            const auto pace = std::chrono::duration<double>(period / cfg.udp_speedup);
            out.trace = run_scenario(script, attack, cfg.sim, cfg.seed, [&](const TraceRow& row) {
                publish(tx, row);
                std::this_thread::sleep_for(pace);
            });
        } catch (...) {
            rx.close();
            monitor.join();
            throw;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(200));
        rx.close();
        monitor.join();
    }
    for (const CycleTriple& tr : aligner.flush()) pipeline.process(tr);

    out.trace.instability_onset = detect_instability(out.trace, cfg.instability);
    out.records = pipeline.records();
    out.alert = pipeline.alert();
    if (baseline) out.report.threshold = baseline->threshold;
    fill_report(cfg, out);
    out.report.triples = aligner.stats().triples;
    out.report.gaps = aligner.stats().gaps;
    out.report.malformed = rstats.malformed;
    return out;
}

BaselineModel calibrate_experiment(const RunConfig& cfg, int runs) {
    if (runs < 1) throw std::invalid_argument("calibration needs at least one run");
    std::vector<double> samples;
    for (int i = 0; i < runs; ++i) {
        RunConfig c = cfg;
        c.attack.kind = AttackKind::none;
        c.seed = cfg.seed + static_cast<std::uint64_t>(i);
        const RunOutcome o = run_experiment(c, std::nullopt);
        for (const DriftRecord& r : o.records) {
            if (r.sd && r.t >= cfg.monitor.calibration_skip) samples.push_back(*r.sd);
        }
    }
    BaselineModel m = calibrate(samples, cfg.monitor.alpha, cfg.monitor.min_calibration_samples);
    m.source_run = std::string(to_string(cfg.scenario.label)) + ":seeds " +
                   std::to_string(cfg.seed) + "-" +
                   std::to_string(cfg.seed + static_cast<std::uint64_t>(runs - 1));
    return m;
}

std::string run_csv_header() {
    std::string h = "seq,t";
    auto state_cols = [&](const char* prefix) {
        for (const char* c : {"px", "py", "pz", "vx", "vy", "vz", "qw", "qx", "qy", "qz", "wx",
                              "wy", "wz"}) {
            h += std::string(",") + prefix + c;
        }
    };
    state_cols("true_");
    state_cols("est_");
    h += ",u_thrust,u_tx,u_ty,u_tz,sp_x,sp_y,sp_z,D,SD,threshold,alert";
    return h;
}

namespace {

void put(std::string& line, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), ",%.17g", v);
    line += buf;
}

void put_state(std::string& line, const VehicleState& s) {
    for (double v : {s.position.x(), s.position.y(), s.position.z(), s.velocity.x(),
                     s.velocity.y(), s.velocity.z(), s.attitude.w(), s.attitude.x(),
                     s.attitude.y(), s.attitude.z(), s.body_rates.x(), s.body_rates.y(),
                     s.body_rates.z()}) {
        put(line, v);
    }
}

void put_empty(std::string& line, int n) { line.append(static_cast<std::size_t>(n), ','); }

}  // namespace

void write_run_csv(const std::string& path, const RunOutcome& o) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << run_csv_header() << '\n';

    std::map<std::uint32_t, const DriftRecord*> by_seq;
    for (const DriftRecord& r : o.records) by_seq[r.seq] = &r;

    for (const TraceRow& row : o.trace.rows) {
        std::string line = std::to_string(row.seq);
        put(line, static_cast<double>(to_us(row.t)) * 1e-6);
        put_state(line, row.truth);
        const std::uint8_t seen = row.seq < o.telemetry_seen.size() ? o.telemetry_seen[row.seq] : 0;
        if (seen & 1u) {
            put_state(line, o.telemetry_states[row.seq]);
        } else {
            put_empty(line, 13);
        }
        if (seen & 2u) {
            const ControlInput& u = o.telemetry_controls[row.seq];
            for (double v : {u.thrust, u.torque.x(), u.torque.y(), u.torque.z()}) put(line, v);
        } else {
            put_empty(line, 4);
        }
        for (double v : {row.setpoint.position.x(), row.setpoint.position.y(),
                         row.setpoint.position.z()}) {
            put(line, v);
        }
        auto it = by_seq.find(row.seq);
        if (it != by_seq.end()) {
            put(line, it->second->d);
            if (it->second->sd) {
                put(line, *it->second->sd);
            } else {
                put_empty(line, 1);
            }
        } else {
            put_empty(line, 2);
        }
        if (o.report.threshold) {
            put(line, *o.report.threshold);
        } else {
            put_empty(line, 1);
        }
        line += (o.alert && o.alert->seq == row.seq) ? ",1" : ",0";
        f << line << '\n';
    }
}

ReplayResult replay_csv(const std::string& path, const MonitorParams& params,
                        const VehicleParams& predictor,
                        const std::optional<BaselineModel>& baseline) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::getline(f, line);
    if (line != run_csv_header()) throw std::runtime_error(path + ": unexpected CSV header");

    struct Row {
        std::uint32_t seq;
        std::uint64_t t_us;
        std::optional<VehicleState> est;
        std::optional<ControlInput> u;
    };
    std::vector<Row> rows;
    std::size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        if (cells.size() != 2 + 13 + 13 + 4 + 3 + 4) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": wrong column count");
        }
        auto num = [&](std::size_t i) { return std::stod(cells[i]); };
        Row r{};
        r.seq = static_cast<std::uint32_t>(std::stoul(cells[0]));
        r.t_us = to_us(num(1));
        if (!cells[15].empty()) {
            VehicleState s;
            s.position = Vec3(num(15), num(16), num(17));
            s.velocity = Vec3(num(18), num(19), num(20));
            s.attitude = Quat(num(21), num(22), num(23), num(24));
            s.body_rates = Vec3(num(25), num(26), num(27));
            r.est = s;
        }
        if (!cells[28].empty()) {
            ControlInput u;
            u.thrust = num(28);
            u.torque = Vec3(num(29), num(30), num(31));
            r.u = u;
        }
        rows.push_back(r);
    }

    MonitorPipeline pipeline(params, predictor, baseline);
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        const Row& a = rows[i];
        const Row& b = rows[i + 1];
        if (!a.est || !a.u || !b.est || b.seq != a.seq + 1 || b.t_us <= a.t_us) continue;
        CycleTriple tr;
        tr.seq = a.seq;
        tr.t = static_cast<double>(a.t_us) * 1e-6;
        tr.dt = static_cast<double>(b.t_us) * 1e-6 - static_cast<double>(a.t_us) * 1e-6;
        tr.x_t = *a.est;
        tr.u_t = *a.u;
        tr.x_next = *b.est;
        pipeline.process(tr);
    }
    return ReplayResult{pipeline.records(), pipeline.alert()};
}

std::string report_to_json(const RunReport& r) {
    json j;
    j["run_id"] = r.run_id;
    j["scenario"] = r.scenario;
    j["attack"] = r.attack;
    j["seed"] = r.seed;
    j["alert_time"] = opt(r.alert_time);
    j["alert_sd"] = opt(r.alert_sd);
    j["threshold"] = opt(r.threshold);
    j["residual_alert_time"] = opt(r.residual_alert_time);
    j["instability_onset"] = opt(r.instability_onset);
    j["lead_time"] = opt(r.lead_time);
    j["position_error_at_alert"] = opt(r.position_error_at_alert);
    j["max_position_error_at_alert"] = opt(r.max_position_error_at_alert);
    j["median_position_error_at_alert"] = opt(r.median_position_error_at_alert);
    j["false_positive"] = r.false_positive;
    j["sd"] = {{"mean", r.sd.mean}, {"stddev", r.sd.stddev}, {"max", r.sd.max}, {"count", r.sd.count}};
    j["triples"] = r.triples;
    j["gaps"] = r.gaps;
    j["malformed"] = r.malformed;
    j["diagnostic"] = r.diagnostic;
    return j.dump(2);
}

RunReport report_from_json(const std::string& text) {
    const json j = json::parse(text);
    RunReport r;
    r.run_id = j.at("run_id").get<std::string>();
    r.scenario = j.at("scenario").get<std::string>();
    r.attack = j.at("attack").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.alert_time = opt_from(j, "alert_time");
    r.alert_sd = opt_from(j, "alert_sd");
    r.threshold = opt_from(j, "threshold");
    r.residual_alert_time = opt_from(j, "residual_alert_time");
    r.instability_onset = opt_from(j, "instability_onset");
    r.lead_time = opt_from(j, "lead_time");
    r.position_error_at_alert = opt_from(j, "position_error_at_alert");
    r.max_position_error_at_alert = opt_from(j, "max_position_error_at_alert");
    r.median_position_error_at_alert = opt_from(j, "median_position_error_at_alert");
    r.false_positive = j.value("false_positive", false);
    if (auto it = j.find("sd"); it != j.end()) {
        r.sd.mean = it->value("mean", 0.0);
        r.sd.stddev = it->value("stddev", 0.0);
        r.sd.max = it->value("max", 0.0);
        r.sd.count = it->value("count", std::size_t{0});
    }
    r.triples = j.value("triples", std::uint64_t{0});
    r.gaps = j.value("gaps", std::uint64_t{0});
    r.malformed = j.value("malformed", std::uint64_t{0});
    r.diagnostic = j.value("diagnostic", std::string{});
    return r;
}

std::string persist_run(const std::string& out_dir, const RunOutcome& o) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path base = std::filesystem::path(out_dir) / o.report.run_id;
    write_run_csv(base.string() + ".csv", o);
    {
        std::ofstream f(base.string() + ".config.json");
        if (!f) throw std::runtime_error("cannot write run metadata in " + out_dir);
        f << o.config_json << '\n';
    }
    const std::string report_path = base.string() + ".report.json";
    std::ofstream f(report_path);
    if (!f) throw std::runtime_error("cannot write " + report_path);
    f << report_to_json(o.report) << '\n';
    return report_path;
}

}  // namespace driftwatch
