#pragma once

#include "driftwatch/controller.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace driftwatch {

enum class ScenarioLabel { hover, slow_translation, waypoint_square, aggressive };

std::string_view to_string(ScenarioLabel label);
ScenarioLabel parse_scenario_label(std::string_view text);

/// A scripted setpoint piece. Holds keep the position fixed; fly-to segments follow a
/// cosine-ramped speed profile from the previous endpoint to the target.
struct Segment {
    enum class Kind { hold, fly_to };
    Kind kind = Kind::hold;
    Vec3 target = Vec3::Zero();
    double speed = 1.0;      // cruise speed, m/s (fly_to)
    double ramp_time = 2.0;  // seconds to reach cruise speed (fly_to)
    double duration = 0.0;   // seconds (hold)
};

/// Parameters the builders use; all lengths in meters, speeds in m/s.
struct ScenarioParams {
    ScenarioLabel label = ScenarioLabel::hover;
    double altitude = 5.0;
    double duration = 60.0;
    double side = 20.0;
    double speed = 2.0;
    double ramp_time = 3.0;
    double distance = 10.0;
};

class ScenarioScript {
public:
    ScenarioScript(ScenarioLabel label, Vec3 start, std::vector<Segment> segments, double duration);

    /// Setpoint at time t. Past the last segment the final position is held.
    Setpoint setpoint_at(double t) const;

    ScenarioLabel label() const { return label_; }
    double duration() const { return duration_; }
    const Vec3& start() const { return start_; }
    const std::vector<Segment>& segments() const { return segments_; }
    /// Time at which all scripted segments have completed.
    double scripted_end() const;

private:
    struct Timed {
        double t0;
        double t1;
        Vec3 from;
        Vec3 to;
        double speed;
        double ramp;
        bool moving;
    };

    ScenarioLabel label_;
    Vec3 start_;
    std::vector<Segment> segments_;
    double duration_;
    std::vector<Timed> timeline_;
};

/// Builds the scripted flight for a label. Square tracks repeat laps until duration.
ScenarioScript build_scenario(const ScenarioParams& p);

/// Defaults per label, including the aggressive square (4x speed, 2 m/s^2 peak).
ScenarioParams default_scenario_params(ScenarioLabel label);

}  // namespace driftwatch
