#include "driftwatch/scenario.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace driftwatch {

std::string_view to_string(ScenarioLabel label) {
    switch (label) {
        case ScenarioLabel::hover: return "hover";
        case ScenarioLabel::slow_translation: return "slow-translation";
        case ScenarioLabel::waypoint_square: return "waypoint-square";
        case ScenarioLabel::aggressive: return "aggressive";
    }
    return "unknown";
}

ScenarioLabel parse_scenario_label(std::string_view text) {
    if (text == "hover") return ScenarioLabel::hover;
    if (text == "slow-translation") return ScenarioLabel::slow_translation;
    if (text == "waypoint-square") return ScenarioLabel::waypoint_square;
    if (text == "aggressive") return ScenarioLabel::aggressive;
    throw std::invalid_argument("unknown scenario label '" + std::string(text) + "'");
}

ScenarioScript::ScenarioScript(ScenarioLabel label, Vec3 start, std::vector<Segment> segments,
                               double duration)
    : label_(label), start_(start), segments_(std::move(segments)), duration_(duration) {
    if (!(duration_ > 0.0)) throw std::invalid_argument("scenario duration must be positive");

    double t = 0.0;
    Vec3 at = start_;
    for (const Segment& s : segments_) {
        if (s.kind == Segment::Kind::hold) {
            if (!(s.duration > 0.0)) throw std::invalid_argument("hold duration must be positive");
            timeline_.push_back({t, t + s.duration, at, at, 0.0, 0.0, false});
            t += s.duration;
            continue;
        }
        if (!(s.speed > 0.0)) throw std::invalid_argument("segment speed must be positive");
        if (!(s.ramp_time > 0.0)) throw std::invalid_argument("segment ramp_time must be positive");
        const double length = (s.target - at).norm();
        if (length <= 0.0) continue;
        const double speed = std::min(s.speed, length / s.ramp_time);
        const double span = length / speed + s.ramp_time;
        timeline_.push_back({t, t + span, at, s.target, speed, s.ramp_time, true});
        t += span;
        at = s.target;
    }
}

double ScenarioScript::scripted_end() const {
    return timeline_.empty() ? 0.0 : timeline_.back().t1;
}

Setpoint ScenarioScript::setpoint_at(double t) const {
    Setpoint sp;
    sp.position = start_;
    for (const Timed& seg : timeline_) {
        if (t >= seg.t1) {
            sp.position = seg.to;
            continue;
        }
        if (t < seg.t0) break;
        if (!seg.moving) {
            sp.position = seg.from;
            break;
        }
        const Vec3 dir = (seg.to - seg.from).normalized();
        const double length = (seg.to - seg.from).norm();
        const double v = seg.speed;
        const double ta = seg.ramp;
        const double tau = t - seg.t0;
        const double total = seg.t1 - seg.t0;
        const double w = std::numbers::pi / ta;

        double s = 0.0, sv = 0.0, sa = 0.0;
        if (tau < ta) {
            s = 0.5 * v * (tau - std::sin(w * tau) / w);
            sv = 0.5 * v * (1.0 - std::cos(w * tau));
            sa = 0.5 * v * w * std::sin(w * tau);
        } else if (tau < total - ta) {
            s = 0.5 * v * ta + v * (tau - ta);
            sv = v;
        } else {
            const double r = total - tau;  // time remaining, mirrors the ramp-up
            s = length - 0.5 * v * (r - std::sin(w * r) / w);
            sv = 0.5 * v * (1.0 - std::cos(w * r));
            sa = -0.5 * v * w * std::sin(w * r);
        }
        sp.position = seg.from + dir * s;
        sp.velocity = dir * sv;
        sp.acceleration = dir * sa;
        break;
    }
    return sp;
}

ScenarioParams default_scenario_params(ScenarioLabel label) {
    ScenarioParams p;
    p.label = label;
    switch (label) {
        case ScenarioLabel::hover:
            p.duration = 60.0;
            break;
        case ScenarioLabel::slow_translation:
            p.duration = 60.0;
            p.speed = 1.0;
            p.ramp_time = 2.0;
            p.distance = 10.0;
            break;
        case ScenarioLabel::waypoint_square:
            p.duration = 90.0;
            p.side = 20.0;
            p.speed = 2.0;
            p.ramp_time = 3.0;
            break;
        case ScenarioLabel::aggressive:
            // 4x the nominal track speed with a 2 m/s^2 peak: pi * v / (2 * ramp) = 2
            p.duration = 70.0;
            p.side = 60.0;
            p.speed = 8.0;
            p.ramp_time = std::numbers::pi * 8.0 / 4.0;
            break;
    }
    return p;
}

ScenarioScript build_scenario(const ScenarioParams& p) {
    if (!(p.altitude > 0.0)) throw std::invalid_argument("scenario.altitude must be positive");
    if (!(p.duration > 0.0)) throw std::invalid_argument("scenario.duration must be positive");

    const Vec3 start(0.0, 0.0, p.altitude);
    std::vector<Segment> segs;
    const double settle = 5.0;

    auto hold = [](double d) {
        Segment s;
        s.kind = Segment::Kind::hold;
        s.duration = d;
        return s;
    };
    auto fly = [&](Vec3 target) {
        Segment s;
        s.kind = Segment::Kind::fly_to;
        s.target = target;
        s.speed = p.speed;
        s.ramp_time = p.ramp_time;
        return s;
    };

    switch (p.label) {
        case ScenarioLabel::hover:
            segs.push_back(hold(p.duration));
            break;
        case ScenarioLabel::slow_translation: {
            if (!(p.distance > 0.0)) throw std::invalid_argument("scenario.distance must be positive");
            segs.push_back(hold(settle));
            const Vec3 far = start + Vec3(p.distance, 0.0, 0.0);
            const double leg = p.distance / p.speed + p.ramp_time;
            double t = settle;
            bool out = true;
            while (t < p.duration) {
                segs.push_back(fly(out ? far : start));
                segs.push_back(hold(2.0));
                t += leg + 2.0;
                out = !out;
            }
            break;
        }
        case ScenarioLabel::waypoint_square:
        case ScenarioLabel::aggressive: {
            if (!(p.side > 0.0)) throw std::invalid_argument("scenario.side must be positive");
            segs.push_back(hold(settle));
            const Vec3 corners[4] = {start + Vec3(p.side, 0.0, 0.0),
                                     start + Vec3(p.side, p.side, 0.0),
                                     start + Vec3(0.0, p.side, 0.0), start};
            const double leg = p.side / std::min(p.speed, p.side / p.ramp_time) + p.ramp_time;
            double t = settle;
            for (int i = 0; t < p.duration; ++i) {
                segs.push_back(fly(corners[i % 4]));
                t += leg;
            }
            break;
        }
    }
    return ScenarioScript(p.label, start, std::move(segs), p.duration);
}

}  // namespace driftwatch
