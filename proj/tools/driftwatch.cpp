// driftwatch: simulate, monitor and summarize degradation-attack experiments.
#include "driftwatch/config.hpp"
#include "driftwatch/experiment.hpp"
#include "driftwatch/report.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

using namespace driftwatch;

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> transport;
    std::optional<double> alpha;
    std::optional<std::size_t> window;
    std::optional<double> duration;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "run configuration (JSON)");
    cmd->add_option("--seed", o.seed, "run seed");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--transport", o.transport, "inproc or udp");
    cmd->add_option("--alpha", o.alpha, "threshold multiplier");
    cmd->add_option("--window", o.window, "sliding window length k");
    cmd->add_option("--duration", o.duration, "scenario duration in seconds");
}

RunConfig resolve(const Overrides& o) {
    RunConfig cfg = o.config.empty() ? default_run_config() : load_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (o.out) cfg.output_dir = *o.out;
    if (o.transport) {
        if (*o.transport == "inproc") {
            cfg.transport = TransportKind::inproc;
        } else if (*o.transport == "udp") {
            cfg.transport = TransportKind::udp;
        } else {
            throw ConfigError("--transport: expected inproc or udp, got '" + *o.transport + "'");
        }
    }
    if (o.alpha) cfg.monitor.alpha = *o.alpha;
    if (o.window) cfg.monitor.window = *o.window;
    if (o.duration) cfg.scenario.duration = *o.duration;
    cfg.validate();
    return cfg;
}

std::optional<BaselineModel> baseline_for(const std::string& path, RunConfig& cfg) {
    const LoadedBaseline b = load_baseline(path);
    // the threshold only means something for the k and weights it was calibrated with
    if (b.window != cfg.monitor.window) {
        throw ConfigError(path + ": baseline calibrated with k=" + std::to_string(b.window) +
                          " but the run uses k=" + std::to_string(cfg.monitor.window));
    }
    cfg.monitor.weights = b.weights;
    BaselineModel m = b.model;
    if (cfg.monitor.alpha != m.alpha) {
        m.alpha = cfg.monitor.alpha;
        m.threshold = m.mu + m.alpha * m.sigma;
    }
    return m;
}

void print_alert(const std::optional<AlertEvent>& a) {
    if (!a) return;
    std::printf("ALERT t=%.3f sd=%.6f threshold=%.6f seq=%u\n", a->t, a->sd, a->threshold, a->seq);
}

std::string opt_str(const std::optional<double>& v) {
    if (!v) return "none";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", *v);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stability-drift monitor workbench"};
    app.require_subcommand(1);

    Overrides cal_o, run_o, rep_o;
    int runs = 5;
    std::string baseline_out;
    auto* cal = app.add_subcommand("calibrate", "pool nominal runs into a baseline file");
    add_common(cal, cal_o);
    cal->add_option("--runs", runs, "number of nominal runs")->check(CLI::PositiveNumber);
    cal->add_option("--baseline", baseline_out, "baseline file to write")->required();

    std::string run_baseline;
    auto* run = app.add_subcommand("run", "simulate, transmit and monitor one run");
    add_common(run, run_o);
    run->add_option("--baseline", run_baseline, "baseline file")->required();

    std::string replay_csv_path, replay_baseline;
    auto* rep = app.add_subcommand("replay", "re-run the monitor over a recorded run CSV");
    add_common(rep, rep_o);
    rep->add_option("csv", replay_csv_path, "run CSV")->required();
    rep->add_option("--baseline", replay_baseline, "baseline file")->required();

    std::string report_dir;
    auto* report = app.add_subcommand("report", "summarize a directory of run reports");
    report->add_option("dir", report_dir, "run directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cal) {
            RunConfig cfg = resolve(cal_o);
            const BaselineModel m = calibrate_experiment(cfg, runs);
            save_baseline(baseline_out, m, cfg.monitor);
            std::printf("baseline mu=%.6f sigma=%.6f threshold=%.6f samples=%zu -> %s\n", m.mu,
                        m.sigma, m.threshold, m.sample_count, baseline_out.c_str());
        } else if (*run) {
            RunConfig cfg = resolve(run_o);
            const auto baseline = baseline_for(run_baseline, cfg);
            const RunOutcome out = run_experiment(cfg, baseline);
            print_alert(out.alert);
            const std::string path = persist_run(cfg.output_dir, out);
            const RunReport& r = out.report;
            std::printf("%s alert=%s onset=%s lead=%s residual=%s triples=%llu gaps=%llu\n",
                        r.run_id.c_str(), opt_str(r.alert_time).c_str(),
                        opt_str(r.instability_onset).c_str(), opt_str(r.lead_time).c_str(),
                        opt_str(r.residual_alert_time).c_str(),
                        static_cast<unsigned long long>(r.triples),
                        static_cast<unsigned long long>(r.gaps));
            if (!r.diagnostic.empty()) std::printf("diagnostic: %s\n", r.diagnostic.c_str());
            std::printf("report: %s\n", path.c_str());
        } else if (*rep) {
            RunConfig cfg = resolve(rep_o);
            const auto baseline = baseline_for(replay_baseline, cfg);
            const ReplayResult res =
                replay_csv(replay_csv_path, cfg.monitor, cfg.sim.vehicle, baseline);
            print_alert(res.alert);
            std::printf("replayed %zu cycles, alert=%s\n", res.records.size(),
                        res.alert ? opt_str(res.alert->t).c_str() : "none");
        } else if (*report) {
            std::cout << report_batch(report_dir);
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
