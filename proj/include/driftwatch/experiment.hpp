#pragma once

#include "driftwatch/config.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace driftwatch {

struct SdStats {
    double mean = 0.0;
    double stddev = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

struct RunReport {
    std::string run_id;
    std::string scenario;
    std::string attack;
    std::uint64_t seed = 0;
    std::optional<double> alert_time;
    std::optional<double> alert_sd;
    std::optional<double> threshold;
    std::optional<double> residual_alert_time;
    std::optional<double> instability_onset;
    /// onset - alert whenever both exist; a negative value is reported as is.
    std::optional<double> lead_time;
    std::optional<double> position_error_at_alert;  // true position vs setpoint at the alert
    std::optional<double> max_position_error_at_alert;
    std::optional<double> median_position_error_at_alert;
    bool false_positive = false;
    SdStats sd;
    std::uint64_t triples = 0;
    std::uint64_t gaps = 0;
    std::uint64_t malformed = 0;
    std::string diagnostic;
};

std::string report_to_json(const RunReport& r);
RunReport report_from_json(const std::string& text);

/// Everything a run produced. records[i] belongs to the triple with seq records[i].seq.
struct RunOutcome {
    RunReport report;
    SimTrace trace;
    std::vector<DriftRecord> records;
    std::optional<AlertEvent> alert;
    /// Estimate and control exactly as the monitor decoded them, by seq.
    std::vector<VehicleState> telemetry_states;
    std::vector<ControlInput> telemetry_controls;
    std::vector<std::uint8_t> telemetry_seen;  // bit 0: STATE received, bit 1: CONTROL received
    std::string config_json;
};

std::string run_id_for(const RunConfig& cfg);

/// Jitter draws depend on both the schedule seed and the run seed.
AttackSchedule effective_attack(const RunConfig& cfg);

/// simulate -> encode -> transport -> align -> monitor. Without a baseline the monitor
/// only records (calibration collection). Inproc runs are bit-reproducible.
RunOutcome run_experiment(const RunConfig& cfg, const std::optional<BaselineModel>& baseline);

/// Pools calibration samples from nominal runs with seeds first_seed .. first_seed+runs-1.
BaselineModel calibrate_experiment(const RunConfig& cfg, int runs);

/// Run CSV: seq,t, true state (13), estimated state (13), control (4), setpoint (3),
/// D, SD, threshold, alert. Missing values are empty fields.
std::string run_csv_header();
void write_run_csv(const std::string& path, const RunOutcome& outcome);

/// Re-runs the monitor over a recorded run CSV.
struct ReplayResult {
    std::vector<DriftRecord> records;
    std::optional<AlertEvent> alert;
};

ReplayResult replay_csv(const std::string& path, const MonitorParams& params,
                        const VehicleParams& predictor, const std::optional<BaselineModel>& baseline);

/// Writes <out>/<run_id>.csv and <out>/<run_id>.report.json; returns the report path.
std::string persist_run(const std::string& out_dir, const RunOutcome& outcome);

}  // namespace driftwatch
