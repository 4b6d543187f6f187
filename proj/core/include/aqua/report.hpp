#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "aqua/metrics.hpp"

namespace aqua {

/// Serialize one report as a JSON object (sorted keys, deterministic bytes).
std::string score_report_to_json(const ScoreReport& report, const LossWeights& weights);
ScoreReport score_report_from_json(const std::string& json_text);

struct SummaryStat {
    int count = 0;
    int finite_count = 0; // rows with a finite value for this metric
    double mean = 0.0;    // over finite values
    double median = 0.0;
    double stddev = 0.0;
};

/// Per-metric aggregation over a batch of reports. Infinite values (identical
/// image sentinel) are excluded from mean/median/stddev and counted apart.
std::map<std::string, SummaryStat> summarize_reports(const std::vector<ScoreReport>& reports);

/// CSV summary with a fixed column order and the metric conventions embedded
/// as leading comment lines.
void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<ScoreReport>& reports, const LossWeights& weights);

} // namespace aqua
