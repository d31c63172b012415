#include "driftwatch/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace driftwatch {

std::vector<BatchRow> summarize_reports(const std::vector<RunReport>& reports) {
    std::map<std::pair<std::string, std::string>, BatchRow> groups;
    std::map<std::pair<std::string, std::string>, double> lead_sums;
    for (const RunReport& r : reports) {
        const auto key = std::make_pair(r.scenario, r.attack);
        BatchRow& row = groups[key];
        row.scenario = r.scenario;
        row.attack = r.attack;
        ++row.runs;
        if (r.alert_time) ++row.alerts;
        if (r.false_positive) ++row.false_positives;
        if (r.instability_onset) ++row.onsets;
        if (r.lead_time) {
            const double lead = *r.lead_time;
            ++row.leads;
            lead_sums[key] += lead;
            row.lead_min = row.lead_min ? std::min(*row.lead_min, lead) : lead;
            row.lead_max = row.lead_max ? std::max(*row.lead_max, lead) : lead;
            if (lead <= 0.0) ++row.negative_leads;
        }
        if (r.alert_time && (!r.residual_alert_time || *r.alert_time < *r.residual_alert_time)) {
            ++row.drift_earlier;
        } else if (r.residual_alert_time) {
            ++row.residual_earlier;
        }
    }
    std::vector<BatchRow> out;
    for (auto& [key, row] : groups) {
        if (row.leads > 0) row.lead_mean = lead_sums[key] / static_cast<double>(row.leads);
        out.push_back(row);
    }
    return out;
}

std::vector<RunReport> load_reports(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw std::runtime_error(dir + ": not a directory");
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && name.size() > 12 &&
            name.compare(name.size() - 12, 12, ".report.json") == 0) {
            paths.push_back(entry.path());
        }
    }
    if (paths.empty()) throw std::runtime_error(dir + ": no run reports found");
    std::sort(paths.begin(), paths.end());
    std::vector<RunReport> reports;
    for (const auto& p : paths) {
        std::ifstream f(p);
        std::stringstream ss;
        ss << f.rdbuf();
        try {
            reports.push_back(report_from_json(ss.str()));
        } catch (const std::exception& e) {
            throw std::runtime_error(p.string() + ": " + e.what());
        }
    }
    return reports;
}

namespace {

std::string num(const std::optional<double>& v) {
    if (!v) return "";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", *v);
    return buf;
}

std::vector<std::vector<std::string>> cells(const std::vector<BatchRow>& rows) {
    std::vector<std::vector<std::string>> t;
    t.push_back({"scenario", "attack", "runs", "alerts", "false_positives", "onsets", "lead_mean",
                 "lead_min", "lead_max", "nonpositive_leads", "drift_first", "residual_first"});
    for (const BatchRow& r : rows) {
        t.push_back({r.scenario, r.attack, std::to_string(r.runs), std::to_string(r.alerts),
                     std::to_string(r.false_positives), std::to_string(r.onsets), num(r.lead_mean),
                     num(r.lead_min), num(r.lead_max), std::to_string(r.negative_leads),
                     std::to_string(r.drift_earlier), std::to_string(r.residual_earlier)});
    }
    return t;
}

}  // namespace

std::string batch_csv(const std::vector<BatchRow>& rows) {
    std::string out;
    for (const auto& line : cells(rows)) {
        for (std::size_t i = 0; i < line.size(); ++i) out += (i ? "," : "") + line[i];
        out += '\n';
    }
    return out;
}

std::string batch_table(const std::vector<BatchRow>& rows) {
    const auto t = cells(rows);
    std::vector<std::size_t> width(t[0].size(), 0);
    for (const auto& line : t) {
        for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
    }
    std::string out;
    for (const auto& line : t) {
        for (std::size_t i = 0; i < line.size(); ++i) {
            // text columns left aligned, numbers right aligned
            const std::string pad(width[i] - line[i].size(), ' ');
            out += i < 2 ? line[i] + pad : pad + line[i];
            if (i + 1 < line.size()) out += "  ";
        }
        out += '\n';
    }
    return out;
}

std::string report_batch(const std::string& dir) {
    const auto rows = summarize_reports(load_reports(dir));
    const std::string path = (std::filesystem::path(dir) / "summary.csv").string();
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << batch_csv(rows);
    return batch_table(rows);
}

}  // namespace driftwatch
