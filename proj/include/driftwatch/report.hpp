#pragma once

#include "driftwatch/experiment.hpp"

#include <optional>
#include <string>
#include <vector>

namespace driftwatch {

/// Aggregates for one (scenario, attack) group of run reports.
struct BatchRow {
    std::string scenario;
    std::string attack;
    std::size_t runs = 0;
    std::size_t alerts = 0;
    std::size_t false_positives = 0;
    std::size_t onsets = 0;
    std::size_t leads = 0;
    std::optional<double> lead_mean;
    std::optional<double> lead_min;
    std::optional<double> lead_max;
    std::size_t negative_leads = 0;
    // drift alert strictly before the residual alert, or the residual detector never fired
    std::size_t drift_earlier = 0;
    std::size_t residual_earlier = 0;
};

std::vector<BatchRow> summarize_reports(const std::vector<RunReport>& reports);

/// Reads every *.report.json in dir. Throws std::runtime_error if there are none.
std::vector<RunReport> load_reports(const std::string& dir);

std::string batch_csv(const std::vector<BatchRow>& rows);
std::string batch_table(const std::vector<BatchRow>& rows);

/// load_reports + summarize; writes <dir>/summary.csv and returns the text table.
std::string report_batch(const std::string& dir);

}  // namespace driftwatch
