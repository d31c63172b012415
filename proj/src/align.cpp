#include "driftwatch/align.hpp"

#include <algorithm>
#include <iterator>
#include <stdexcept>

namespace driftwatch {

CycleAligner::CycleAligner(AlignerConfig cfg) : cfg_(cfg) {
    if (!(cfg_.nominal_period > 0.0)) throw std::invalid_argument("nominal_period must be positive");
    if (cfg_.reorder_window == 0) throw std::invalid_argument("reorder_window must be >= 1");
}

std::vector<CycleTriple> CycleAligner::push(const ReceivedFrame& rf) {
    std::vector<CycleTriple> out;
    newest_recv_ = std::max(newest_recv_, rf.recv_time);

    const std::uint32_t seq = rf.frame.seq;
    const bool is_state = rf.frame.type == MsgType::state;
    if (cursor_ && seq < *cursor_) {
        ++stats_.late_drops;
        drain(out, false);
        return out;
    }
    auto& bucket = is_state ? states_ : controls_;
    if (!bucket.emplace(seq, rf).second) ++stats_.duplicates;

    drain(out, false);
    return out;
}

std::vector<CycleTriple> CycleAligner::flush() {
    std::vector<CycleTriple> out;
    drain(out, true);
    return out;
}

std::size_t CycleAligner::frames_ahead() const {
    const std::uint32_t n = *cursor_;
    return static_cast<std::size_t>(std::distance(states_.upper_bound(n + 1), states_.end()) +
                                    std::distance(controls_.upper_bound(n), controls_.end()));
}

bool CycleAligner::cursor_stale() const {
    const std::uint32_t n = *cursor_;
    const double limit = newest_recv_ - cfg_.stale_after;
    auto old = [&](const std::map<std::uint32_t, ReceivedFrame>& m, std::uint32_t key) {
        auto it = m.find(key);
        return it != m.end() && it->second.recv_time < limit;
    };
    return old(states_, n) || old(controls_, n) || old(states_, n + 1);
}

void CycleAligner::skip_cursor() {
    const std::uint32_t n = *cursor_;
    const bool stale = cursor_stale();
    const std::size_t erased = states_.erase(n) + controls_.erase(n);
    if (stale) stats_.stale_drops += erased;
    ++stats_.gaps;
    cursor_ = n + 1;
}

bool CycleAligner::try_emit(std::vector<CycleTriple>& out) {
    const std::uint32_t n = *cursor_;
    auto s0 = states_.find(n);
    auto c0 = controls_.find(n);
    auto s1 = states_.find(n + 1);
    if (s0 == states_.end() || c0 == controls_.end() || s1 == states_.end()) return false;

    const double dt = static_cast<double>(s1->second.frame.t_us) * 1e-6 -
                      static_cast<double>(s0->second.frame.t_us) * 1e-6;
    if (s1->second.frame.t_us > s0->second.frame.t_us &&
        dt <= cfg_.max_period_factor * cfg_.nominal_period) {
        CycleTriple tr;
        tr.seq = n;
        tr.t = static_cast<double>(s0->second.frame.t_us) * 1e-6;
        tr.dt = dt;
        tr.x_t = state_from_frame(s0->second.frame);
        tr.u_t = control_from_frame(c0->second.frame);
        tr.x_next = state_from_frame(s1->second.frame);
        out.push_back(tr);
        ++stats_.triples;
    } else {
        ++stats_.bad_dt;
    }
    states_.erase(s0);
    controls_.erase(c0);
    cursor_ = n + 1;
    return true;
}

void CycleAligner::drain(std::vector<CycleTriple>& out, bool final) {
    for (;;) {
        if (!cursor_) {
            if (states_.empty()) return;
            if (!final && states_.size() + controls_.size() < cfg_.reorder_window) return;
            cursor_ = states_.begin()->first;
            while (!controls_.empty() && controls_.begin()->first < *cursor_) {
                controls_.erase(controls_.begin());
                ++stats_.late_drops;
            }
        }
        if (try_emit(out)) continue;

        const bool anything_later = frames_ahead() > 0 || controls_.count(*cursor_ + 1) > 0 ||
                                    states_.count(*cursor_ + 1) > 0;
        const bool give_up = final ? anything_later
                                   : frames_ahead() >= cfg_.reorder_window || cursor_stale();
        if (!give_up) return;
        skip_cursor();
    }
}

std::vector<CycleTriple> align_cycles(const std::vector<ReceivedFrame>& frames,
                                      const AlignerConfig& cfg, AlignerStats* stats) {
    CycleAligner aligner(cfg);
    std::vector<CycleTriple> out;
    for (const ReceivedFrame& f : frames) {
        auto t = aligner.push(f);
        out.insert(out.end(), t.begin(), t.end());
    }
    auto t = aligner.flush();
    out.insert(out.end(), t.begin(), t.end());
    if (stats) *stats = aligner.stats();
    return out;
}

}  // namespace driftwatch
