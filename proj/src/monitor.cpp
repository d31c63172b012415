#include "driftwatch/monitor.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace driftwatch {

void NormWeights::validate() const {
    const double w[] = {w_pos, w_vel, w_att, w_rate};
    bool any = false;
    for (double v : w) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("weights must be >= 0");
        any = any || v > 0.0;
    }
    if (!any) throw std::invalid_argument("at least one weight must be positive");
}

double divergence(const VehicleState& observed, const VehicleState& predicted,
                  const NormWeights& w) {
    if (!observed.is_finite() || !predicted.is_finite()) {
        throw std::invalid_argument("divergence of non-finite state");
    }
    const double pos = w.w_pos * (observed.position - predicted.position).norm();
    const double vel = w.w_vel * (observed.velocity - predicted.velocity).norm();
    const double att = w.w_att * attitude_angle(observed.attitude, predicted.attitude);
    const double rate = w.w_rate * (observed.body_rates - predicted.body_rates).norm();
    return std::sqrt(pos * pos + vel * vel + att * att + rate * rate);
}

DriftWindow::DriftWindow(std::size_t k) : buffer_(k, 0.0) {
    if (k == 0) throw std::invalid_argument("window length must be >= 1");
}

void DriftWindow::reset() {
    std::fill(buffer_.begin(), buffer_.end(), 0.0);
    head_ = filled_ = since_rebuild_ = 0;
    sum_ = 0.0;
    anchor_.reset();
}

std::optional<double> DriftWindow::update(double d) {
    const std::size_t k = buffer_.size();
    if (!anchor_) anchor_ = d;
    // buffer holds offsets from the anchor, so a constant input sums to exactly zero
    const double x = d - *anchor_;
    if (filled_ == k) sum_ -= buffer_[head_];
    buffer_[head_] = x;
    head_ = (head_ + 1) % k;
    sum_ += x;
    if (filled_ < k) ++filled_;
    if (filled_ < k) return std::nullopt;

    if (++since_rebuild_ >= k) {
        // oldest sample sits at head_ once the buffer is full
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) s += buffer_[(head_ + i) % k];
        sum_ = s;
        since_rebuild_ = 0;
    }
    return *anchor_ + sum_ / static_cast<double>(k);
}

BaselineModel calibrate(std::span<const double> series, double alpha, std::size_t min_samples) {
    if (series.size() < min_samples || series.empty()) {
        throw std::invalid_argument("calibration needs at least " + std::to_string(min_samples) +
                                    " samples, got " + std::to_string(series.size()));
    }
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be >= 0");
    const double shift = series.front();
    double sum = 0.0;
    for (double v : series) {
        if (!std::isfinite(v)) throw std::invalid_argument("calibration series has non-finite values");
        sum += v - shift;
    }
    const double n = static_cast<double>(series.size());
    const double mu = shift + sum / n;
    double ss = 0.0;
    for (double v : series) ss += (v - mu) * (v - mu);

    BaselineModel m;
    m.mu = mu;
    m.sigma = std::sqrt(ss / n);
    m.alpha = alpha;
    m.threshold = m.mu + alpha * m.sigma;
    m.sample_count = series.size();
    return m;
}

AlertLatch::AlertLatch(int persistence) : persistence_(persistence) {
    if (persistence < 1) throw std::invalid_argument("persistence must be >= 1");
}

std::optional<AlertEvent> AlertLatch::decide(double sd, double threshold, double t,
                                             std::uint32_t seq) {
    if (sd > threshold) {
        ++run_;
    } else {
        run_ = 0;
    }
    if (fired_ || run_ < persistence_) return std::nullopt;
    fired_ = true;
    return AlertEvent{t, seq, sd, threshold, run_};
}

void MonitorParams::validate() const {
    if (window < 1) throw std::invalid_argument("monitor.window must be >= 1");
    if (!(alpha >= 0.0)) throw std::invalid_argument("monitor.alpha must be >= 0");
    if (persistence < 1) throw std::invalid_argument("monitor.persistence must be >= 1");
    if (gap_reset < 1) throw std::invalid_argument("monitor.gap_reset must be >= 1");
    weights.validate();
}

MonitorPipeline::MonitorPipeline(MonitorParams params, VehicleParams predictor,
                                 std::optional<BaselineModel> baseline)
    : params_(params),
      predictor_(predictor),
      baseline_(std::move(baseline)),
      window_(params.window),
      latch_(params.persistence) {
    params_.validate();
    predictor_.validate();
}

DriftRecord MonitorPipeline::process(const CycleTriple& tr) {
    if (last_seq_ && tr.seq > *last_seq_ + 1) {
        const std::uint32_t missing = tr.seq - *last_seq_ - 1;
        skipped_ += missing;
        if (missing >= static_cast<std::uint32_t>(params_.gap_reset)) {
            window_.reset();
            latch_.interrupt();
            ++resets_;
        }
    }
    last_seq_ = tr.seq;

    const VehicleState predicted = predict_step(tr.x_t, tr.u_t, predictor_, tr.dt);
    DriftRecord rec;
    rec.seq = tr.seq;
    rec.t = tr.t + tr.dt;  // the cycle completes when x_next is observed
    rec.d = divergence(tr.x_next, predicted, params_.weights);
    rec.sd = window_.update(rec.d);

    if (baseline_) {
        if (rec.sd) {
            if (auto ev = latch_.decide(*rec.sd, baseline_->threshold, rec.t, rec.seq)) alert_ = ev;
        } else {
            latch_.interrupt();
        }
    }
    records_.push_back(rec);
    return rec;
}

std::vector<double> MonitorPipeline::calibration_samples() const {
    std::vector<double> out;
    for (const DriftRecord& r : records_) {
        if (r.sd && r.t >= params_.calibration_skip) out.push_back(*r.sd);
    }
    return out;
}

void save_baseline(const std::string& path, const BaselineModel& m, const MonitorParams& p) {
    nlohmann::json j;
    j["mu"] = m.mu;
    j["sigma"] = m.sigma;
    j["alpha"] = m.alpha;
    j["threshold"] = m.threshold;
    j["k"] = p.window;
    j["weights"] = {{"w_pos", p.weights.w_pos},
                    {"w_vel", p.weights.w_vel},
                    {"w_att", p.weights.w_att},
                    {"w_rate", p.weights.w_rate}};
    j["sample_count"] = m.sample_count;
    j["source_run"] = m.source_run;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write baseline file " + path);
    out << j.dump(2) << '\n';
}

LoadedBaseline load_baseline(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open baseline file " + path);
    LoadedBaseline b;
    try {
        const nlohmann::json j = nlohmann::json::parse(in);
        b.model.mu = j.at("mu").get<double>();
        b.model.sigma = j.at("sigma").get<double>();
        b.model.alpha = j.at("alpha").get<double>();
        b.model.threshold = j.at("threshold").get<double>();
        b.model.sample_count = j.at("sample_count").get<std::size_t>();
        b.model.source_run = j.value("source_run", std::string{});
        b.window = j.at("k").get<std::size_t>();
        const auto& w = j.at("weights");
        b.weights.w_pos = w.at("w_pos").get<double>();
        b.weights.w_vel = w.at("w_vel").get<double>();
        b.weights.w_att = w.at("w_att").get<double>();
        b.weights.w_rate = w.at("w_rate").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("baseline file " + path + ": " + e.what());
    }
    if (!(b.model.sigma >= 0.0) || b.model.threshold < b.model.mu) {
        throw std::runtime_error("baseline file " + path + ": inconsistent statistics");
    }
    return b;
}

}  // namespace driftwatch
