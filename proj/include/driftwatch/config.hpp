#pragma once

#include "driftwatch/instability.hpp"
#include "driftwatch/monitor.hpp"
#include "driftwatch/simulator.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace driftwatch {

enum class TransportKind { inproc, udp };

std::string_view to_string(TransportKind kind);

struct ResidualParams {
    double epsilon = 0.5;  // m
    double hold = 1.0;     // s
};

struct RunConfig {
    ScenarioParams scenario;
    AttackSchedule attack;
    SimConfig sim;
    MonitorParams monitor;
    ResidualParams residual;
    InstabilityCriteria instability;
    TransportKind transport = TransportKind::inproc;
    std::uint16_t udp_port = 14560;
    double udp_speedup = 20.0;  // sender pacing relative to real time
    std::uint64_t seed = 1;
    std::string output_dir = "runs";

    /// Throws ConfigError naming the first invalid field.
    void validate() const;
};

/// Config problem with a location: a JSON line/column or a dotted field path.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Defaults for a scenario label with no attack.
RunConfig default_run_config(ScenarioLabel label = ScenarioLabel::hover);

/// Parses a JSON document. Absent keys keep their defaults; unknown keys are errors.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::string& path);

/// Canonical JSON form (used for run metadata).
std::string dump_config(const RunConfig& cfg);

}  // namespace driftwatch
