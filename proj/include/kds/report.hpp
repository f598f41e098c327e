#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "kds/knowledge.hpp"
#include "kds/selection.hpp"

namespace kds {

// A scores-sidecar row paired with its pipeline status.
struct SidecarRow {
    KnowledgeScores scores;
    std::string status; // scored | skipped | generation_failed | quality_unknown
};

// Run summary: score distributions, gate pass rates and selection
// composition. Metric histograms use 20 half-open bins [lo, hi) over [0,1]
// with the final bin closed.
struct RunReport {
    static constexpr int kMetricBins = 20;

    std::array<std::int64_t, 7> quality_histogram{}; // scores 0..5 + unknown
    std::array<std::int64_t, kMetricBins> ka_histogram{};
    std::array<std::int64_t, kMetricBins> kc_histogram{};

    struct Summary {
        std::int64_t selected = 0;
        std::int64_t rejected_quality = 0;
        std::int64_t rejected_diversity = 0;
        // Records that never reached the gates: generation failures, unknown
        // quality, and pool members left unvisited once the budget was met.
        std::int64_t skipped = 0;
        std::int64_t shortfall = 0; // k - |selected| when positive
    } summary;

    SelectionConfig config_echo;
    std::int64_t corpus_size = 0;

    std::int64_t quality_total() const;
    std::int64_t summary_total() const; // selected+rejects+skipped
};

// Index of the metric-histogram bin holding `value` (clamped to [0,1]).
int metric_bin(double value);

RunReport build_report(std::int64_t corpus_size,
                       const std::vector<SidecarRow>& sidecar,
                       const SelectionResult& selection,
                       const SelectionConfig& config);

void to_json(nlohmann::json& j, const RunReport& r);
void from_json(const nlohmann::json& j, RunReport& r);

enum class ReportFormat { Json, Csv };

// Writes report.json / report.csv into `dir`. JSON has sorted keys; the CSV
// has one row per histogram bin plus the summary rows.
void emit_report(const RunReport& report, const std::filesystem::path& dir,
                 const std::set<ReportFormat>& formats);

std::string report_to_csv(const RunReport& report);

} // namespace kds
