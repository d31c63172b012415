#pragma once

#include "driftwatch/align.hpp"
#include "driftwatch/dynamics.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace driftwatch {

/// Per-block scales turning a state difference into a dimensionless distance.
/// Units: w_pos 1/m, w_vel s/m, w_att 1/rad, w_rate s/rad.
struct NormWeights {
    double w_pos = 1.0;
    double w_vel = 0.5;
    double w_att = 2.0;
    double w_rate = 0.5;

    void validate() const;
};

/// Weighted distance between the observed next state and the one-step prediction.
/// The attitude block uses the geodesic angle, so q and -q are the same attitude.
double divergence(const VehicleState& observed, const VehicleState& predicted,
                  const NormWeights& weights);

/// Mean of the most recent k divergence values, O(1) per update.
///
/// The running sum is rebuilt from the buffer once per k updates so rounding error
/// cannot accumulate over long runs.
class DriftWindow {
public:
    explicit DriftWindow(std::size_t k);

    /// Adds one divergence value; returns the windowed mean once k values are held.
    std::optional<double> update(double d);
    void reset();

    std::size_t size() const { return filled_; }
    std::size_t capacity() const { return buffer_.size(); }

private:
    std::vector<double> buffer_;
    std::size_t head_ = 0;
    std::size_t filled_ = 0;
    std::size_t since_rebuild_ = 0;
    double sum_ = 0.0;
    std::optional<double> anchor_;
};

struct BaselineModel {
    double mu = 0.0;
    double sigma = 0.0;
    double alpha = 2.5;
    double threshold = 0.0;
    std::size_t sample_count = 0;
    std::string source_run;
};

inline constexpr std::size_t kDefaultMinCalibrationSamples = 200;

/// mu and sigma (population) of nominal drift values; threshold = mu + alpha * sigma.
/// Throws std::invalid_argument on too few samples or non-finite values.
BaselineModel calibrate(std::span<const double> sd_series, double alpha,
                        std::size_t min_samples = kDefaultMinCalibrationSamples);

struct AlertEvent {
    double t = 0.0;
    std::uint32_t seq = 0;
    double sd = 0.0;
    double threshold = 0.0;
    int consecutive = 0;
};

/// Latched threshold decision: fires once, at the first cycle where SD > threshold
/// has held for `persistence` consecutive cycles.
class AlertLatch {
public:
    explicit AlertLatch(int persistence);

    std::optional<AlertEvent> decide(double sd, double threshold, double t, std::uint32_t seq);
    /// Breaks the consecutive-exceed run (used when no SD is available for a cycle).
    void interrupt() { run_ = 0; }

    bool fired() const { return fired_; }
    int persistence() const { return persistence_; }

private:
    int persistence_;
    int run_ = 0;
    bool fired_ = false;
};

struct MonitorParams {
    std::size_t window = 50;
    double alpha = 2.5;
    int persistence = 75;
    NormWeights weights;
    int gap_reset = 10;             // consecutive missing cycles that clear the window
    double calibration_skip = 5.0;  // seconds excluded from calibration at run start
    std::size_t min_calibration_samples = kDefaultMinCalibrationSamples;

    void validate() const;
};

struct DriftRecord {
    std::uint32_t seq = 0;
    double t = 0.0;
    double d = 0.0;
    std::optional<double> sd;
};

/// Prediction -> divergence -> window -> threshold decision over a triple stream.
/// Without a baseline the pipeline only records (calibration collection).
class MonitorPipeline {
public:
    MonitorPipeline(MonitorParams params, VehicleParams predictor,
                    std::optional<BaselineModel> baseline = std::nullopt);

    DriftRecord process(const CycleTriple& triple);

    const std::vector<DriftRecord>& records() const { return records_; }
    const std::optional<AlertEvent>& alert() const { return alert_; }
    const std::optional<BaselineModel>& baseline() const { return baseline_; }
    std::uint64_t skipped_cycles() const { return skipped_; }
    std::uint64_t window_resets() const { return resets_; }

    /// SD values with t >= calibration_skip, ready for calibrate().
    std::vector<double> calibration_samples() const;

private:
    MonitorParams params_;
    VehicleParams predictor_;
    std::optional<BaselineModel> baseline_;
    DriftWindow window_;
    AlertLatch latch_;
    std::optional<std::uint32_t> last_seq_;
    std::vector<DriftRecord> records_;
    std::optional<AlertEvent> alert_;
    std::uint64_t skipped_ = 0;
    std::uint64_t resets_ = 0;
};

/// Baseline file: JSON with mu, sigma, alpha, threshold, k, weights, sample_count and
/// source run id. Throws std::runtime_error on IO or format errors.
void save_baseline(const std::string& path, const BaselineModel& model, const MonitorParams& params);

struct LoadedBaseline {
    BaselineModel model;
    std::size_t window = 0;
    NormWeights weights;
};

LoadedBaseline load_baseline(const std::string& path);

}  // namespace driftwatch
