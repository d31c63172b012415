// End-to-end acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any FAIL.
#include "driftwatch/config.hpp"
#include "driftwatch/experiment.hpp"
#include "driftwatch/frame.hpp"
#include "driftwatch/monitor.hpp"
#include "driftwatch/scenario.hpp"
#include "driftwatch/simulator.hpp"
#include "support/oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace driftwatch;
namespace fs = std::filesystem;

namespace {

constexpr ScenarioLabel kLabels[] = {ScenarioLabel::hover, ScenarioLabel::slow_translation,
                                     ScenarioLabel::waypoint_square, ScenarioLabel::aggressive};
constexpr int kRuns = 10;
constexpr std::uint64_t kCalibrationSeed = 1000;
constexpr int kCalibrationRuns = 5;

int failures = 0;

void verdict(int n, bool ok, const std::string& what, const std::string& detail) {
    std::printf("%s criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", n, what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

double median(std::vector<double> v) {
    if (v.empty()) return NAN;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

RunConfig config_for(ScenarioLabel label, AttackKind kind, std::uint64_t seed) {
    RunConfig c = default_run_config(label);
    c.attack.kind = kind;
    c.seed = seed;
    return c;
}

std::map<ScenarioLabel, BaselineModel> baselines;

const BaselineModel& baseline(ScenarioLabel label) {
    auto it = baselines.find(label);
    if (it == baselines.end()) {
        it = baselines.emplace(label, calibrate_experiment(config_for(label, AttackKind::none, kCalibrationSeed),
                                                           kCalibrationRuns)).first;
    }
    return it->second;
}

struct AttackRun {
    ScenarioLabel label;
    RunOutcome outcome;
};

std::vector<AttackRun> run_attack(AttackKind kind) {
    std::vector<AttackRun> out;
    for (ScenarioLabel label : kLabels) {
        for (int s = 1; s <= kRuns; ++s) {
            out.push_back({label, run_experiment(config_for(label, kind, static_cast<std::uint64_t>(s)),
                                                 baseline(label))});
        }
    }
    return out;
}

// Per-label alert and lead summary; also prints every lead time.
bool early_warning(const std::vector<AttackRun>& runs, bool check_error, std::string& detail) {
    bool ok = true;
    std::ostringstream d;
    for (ScenarioLabel label : kLabels) {
        int alerts = 0, positive = 0;
        std::vector<double> leads, errors;
        std::string bad;
        for (const AttackRun& r : runs) {
            if (r.label != label) continue;
            const RunReport& rep = r.outcome.report;
            if (!rep.alert_time) continue;
            ++alerts;
            if (rep.position_error_at_alert) errors.push_back(*rep.position_error_at_alert);
            if (rep.lead_time && *rep.lead_time > 0.0) {
                ++positive;
                leads.push_back(*rep.lead_time);
            } else {
                // an alert after onset, or an onset never reached
                bad += " " + rep.run_id + (rep.lead_time ? fmt("(lead %.2f)", *rep.lead_time) : "(no onset)");
            }
        }
        const double med = median(errors);
        const bool group_ok = alerts >= 9 && positive == alerts && (!check_error || med < 0.25);
        ok = ok && group_ok;
        double mean = 0.0;
        for (double l : leads) mean += l;
        if (!leads.empty()) mean /= static_cast<double>(leads.size());
        d << (d.tellp() > 0 ? "; " : "") << to_string(label) << " " << alerts << "/" << kRuns
          << " alerts, " << positive << " positive leads, mean lead " << fmt("%.2f s", mean);
        if (check_error) d << ", median error at alert " << fmt("%.3f m", med);
        if (!bad.empty()) d << ", violations:" << bad;

        std::printf("  %-16s leads:", std::string(to_string(label)).c_str());
        for (const AttackRun& r : runs) {
            if (r.label != label) continue;
            const RunReport& rep = r.outcome.report;
            std::printf(" %s", rep.lead_time ? fmt("%.2f", *rep.lead_time).c_str() : "-");
        }
        std::printf("\n");
    }
    detail = d.str();
    return ok;
}

void criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    int alerts = 0, runs = 0;
    std::string who;
    for (ScenarioLabel label : kLabels) {
        const BaselineModel& base = baseline(label);
        std::printf("  %-16s baseline mu=%.5f sigma=%.5f threshold=%.5f samples=%zu\n",
                    std::string(to_string(label)).c_str(), base.mu, base.sigma, base.threshold,
                    base.sample_count);
    }
    const auto t1 = std::chrono::steady_clock::now();
    for (ScenarioLabel label : kLabels) {
        for (int s = 1; s <= kRuns; ++s) {
            const RunOutcome o = run_experiment(config_for(label, AttackKind::none, static_cast<std::uint64_t>(s)),
                                                baseline(label));
            ++runs;
            if (o.report.alert_time) {
                ++alerts;
                who += " " + o.report.run_id;
            }
        }
    }
    const auto t2 = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(t2 - t1).count();
    const double cal = std::chrono::duration<double>(t1 - t0).count();
    verdict(1, alerts == 0 && secs < 60.0, "nominal false positives",
            std::to_string(alerts) + "/" + std::to_string(runs) + " runs alerted" + who + ", " +
                fmt("%.2f s", secs) + " for the runs (" + fmt("%.2f s", cal) + " calibration)");
}

// One-sided permutation test on the least-squares slope of y against x.
double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

double permutation_p(const std::vector<double>& x, std::vector<double> y, double observed, std::mt19937_64& rng) {
    const int perms = 2000;
    int at_least = 0;
    for (int i = 0; i < perms; ++i) {
        std::shuffle(y.begin(), y.end(), rng);
        if (slope(x, y) >= observed) ++at_least;
    }
    return (at_least + 1.0) / (perms + 1.0);
}

void criterion5(const std::vector<AttackRun>& runs) {
    std::mt19937_64 rng(20240611);
    int tested = 0, passed = 0;
    double worst_p = 0.0;
    std::string bad;
    for (const AttackRun& r : runs) {
        const RunOutcome& o = r.outcome;
        if (!o.report.alert_time) continue;
        const double t_start = config_for(r.label, AttackKind::imu_bias_drift, 1).attack.t_start;
        std::vector<double> x, y;
        for (const DriftRecord& rec : o.records) {
            if (rec.sd && rec.t >= t_start && rec.t <= *o.report.alert_time) {
                x.push_back(rec.t);
                y.push_back(*rec.sd);
            }
        }
        ++tested;
        if (x.size() < 3) {
            bad += " " + o.report.run_id + "(too few samples)";
            continue;
        }
        const double b = slope(x, y);
        const double p = permutation_p(x, y, b, rng);
        worst_p = std::max(worst_p, p);
        if (b > 0.0 && p < 0.01) {
            ++passed;
        } else {
            bad += " " + o.report.run_id + fmt("(p=%.4f)", p);
        }
    }
    verdict(5, tested > 0 && passed == tested, "drift trend before alert",
            std::to_string(passed) + "/" + std::to_string(tested) +
                " alerted bias runs have a positive SD slope with p < 0.01 (largest p " +
                fmt("%.4f", worst_p) + ", 2000 permutations)" + bad);
}

void criterion4(const std::vector<AttackRun>& bias, const std::vector<AttackRun>& jitter) {
    int both = 0, earlier = 0;
    std::string bad;
    for (const auto* set : {&bias, &jitter}) {
        for (const AttackRun& r : *set) {
            const RunReport& rep = r.outcome.report;
            if (!rep.alert_time || !rep.residual_alert_time) continue;
            ++both;
            if (*rep.alert_time < *rep.residual_alert_time) {
                ++earlier;
            } else {
                bad += " " + rep.run_id;
            }
        }
    }
    verdict(4, earlier == both, "drift alert precedes residual alert",
            std::to_string(earlier) + "/" + std::to_string(both) +
                " attack runs where both detectors fired" + bad);
}

void criterion6() {
    std::vector<std::string> notes;
    bool ok = true;

    // predict_step against the sub-stepped oracle over the envelope
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const VehicleParams p;
    double worst = 0.0;
    for (int i = 0; i < 500; ++i) {
        VehicleState s;
        s.position = 20.0 * Vec3(unit(rng), unit(rng), unit(rng));
        s.velocity = 8.0 * Vec3(unit(rng), unit(rng), unit(rng));
        Vec3 axis(unit(rng), unit(rng), 0.0);
        if (axis.norm() < 1e-3) axis = Vec3::UnitY();
        s.attitude = quat_exp(Vec3(0.0, 0.0, 3.0 * unit(rng))) *
                     quat_exp(axis.normalized() * 0.5236 * std::abs(unit(rng)));
        const Vec3 dir(unit(rng), unit(rng), unit(rng));
        s.body_rates = dir.normalized() * 1.0 * std::abs(unit(rng));
        ControlInput u;
        u.thrust = 0.5 * (unit(rng) + 1.0);
        u.torque = 0.5 * Vec3(unit(rng), unit(rng), unit(rng));
        const double dt = 0.02 * std::abs(unit(rng)) + 1e-4;
        const VehicleState ref = oracle::substep_oracle(s, u, p, dt, 1000);
        worst = std::max(worst, oracle::max_rel_err(predict_step(s, u, p, dt), ref));
    }
    ok = ok && worst <= 1e-3;
    notes.push_back("predict_step max rel err " + fmt("%.2e", worst));

    // running window against a naive mean
    DriftWindow w(50);
    std::deque<double> recent;
    std::lognormal_distribution<double> dist(-4.0, 1.5);
    double drift = 0.0;
    for (int i = 0; i < 1000000; ++i) {
        const double d = dist(rng);
        recent.push_back(d);
        if (recent.size() > 50) recent.pop_front();
        const auto sd = w.update(d);
        if (!sd) continue;
        double sum = 0.0;
        for (double v : recent) sum += v;
        drift = std::max(drift, std::abs(*sd - sum / 50.0));
    }
    ok = ok && drift <= 1e-12;
    notes.push_back("window vs naive mean " + fmt("%.2e", drift));

    // codec round trip and every single-bit flip on the golden frame
    const bool golden_ok = encode_frame(oracle::golden_frame()) == oracle::kGoldenBytes &&
                           decode_frame(oracle::kGoldenBytes).frame == oracle::golden_frame();
    int rejected = 0, flips = 0;
    for (std::size_t byte = 2; byte < oracle::kGoldenBytes.size(); ++byte) {
        for (int bit = 0; bit < 8; ++bit) {
            std::vector<std::uint8_t> b = oracle::kGoldenBytes;
            b[byte] ^= static_cast<std::uint8_t>(1u << bit);
            ++flips;
            if (decode_frame(b).error == DecodeError::crc_mismatch) ++rejected;
        }
    }
    ok = ok && golden_ok && rejected == flips;
    notes.push_back(std::string("golden frame ") + (golden_ok ? "exact" : "MISMATCH") + ", " +
                    std::to_string(rejected) + "/" + std::to_string(flips) + " bit flips rejected");

    // threshold from the reference nominal statistics
    std::vector<double> series;
    for (int i = 0; i < 200; ++i) series.push_back(i % 2 ? 0.022 : 0.010);
    const BaselineModel m = calibrate(series, 2.5);
    ok = ok && std::abs(m.threshold - 0.031) < 1e-12;
    notes.push_back("T(0.016, 0.006, 2.5) = " + fmt("%.6f", m.threshold));

    std::string detail;
    for (const std::string& n : notes) detail += (detail.empty() ? "" : "; ") + n;
    verdict(6, ok, "unit oracles", detail);
}

void criterion7() {
    ScenarioParams sp = default_scenario_params(ScenarioLabel::waypoint_square);
    sp.duration = 30.0;
    SimConfig cfg;
    cfg.noise = NoiseConfig{0.0, 0.0, 0.0};
    const SimTrace t = run_ideal_loop(build_scenario(sp), cfg);
    MonitorPipeline mon(MonitorParams{}, cfg.vehicle);
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < t.rows.size(); ++i) {
        CycleTriple tr;
        tr.seq = t.rows[i].seq;
        tr.t = t.rows[i].t;
        tr.dt = t.rows[i + 1].t - t.rows[i].t;
        tr.x_t = t.rows[i].truth;
        tr.u_t = t.rows[i].applied;
        tr.x_next = t.rows[i + 1].truth;
        worst = std::max(worst, mon.process(tr).d);
    }
    verdict(7, worst <= 1e-9 && mon.records().size() == 1500, "self-consistency",
            "max D " + fmt("%.3e", worst) + " over " + std::to_string(mon.records().size()) + " cycles");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion8() {
    const fs::path dir = fs::temp_directory_path() / "dw_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    int same = 0, total = 0;
    std::string bad;
    for (ScenarioLabel label : kLabels) {
        for (AttackKind kind : {AttackKind::none, AttackKind::imu_bias_drift, AttackKind::timing_jitter}) {
            const RunConfig c = config_for(label, kind, 17);
            write_run_csv((dir / "a.csv").string(), run_experiment(c, baseline(label)));
            write_run_csv((dir / "b.csv").string(), run_experiment(c, baseline(label)));
            ++total;
            if (slurp(dir / "a.csv") == slurp(dir / "b.csv")) {
                ++same;
            } else {
                bad += " " + run_id_for(c);
            }
        }
    }
    fs::remove_all(dir);
    verdict(8, same == total, "determinism",
            std::to_string(same) + "/" + std::to_string(total) + " configurations gave byte-identical CSVs" + bad);
}

}  // namespace

int main() {
    try {
        criterion1();

        const std::vector<AttackRun> bias = run_attack(AttackKind::imu_bias_drift);
        std::string detail;
        const bool ok2 = early_warning(bias, true, detail);
        verdict(2, ok2, "bias-drift early warning", detail);

        const std::vector<AttackRun> jitter = run_attack(AttackKind::timing_jitter);
        const bool ok3 = early_warning(jitter, false, detail);
        verdict(3, ok3, "timing-jitter early warning", detail);

        criterion4(bias, jitter);
        criterion5(bias);
        criterion6();
        criterion7();
        criterion8();
    } catch (const std::exception& e) {
        std::printf("FAIL acceptance suite aborted: %s\n", e.what());
        return 1;
    }
    return failures == 0 ? 0 : 1;
}
