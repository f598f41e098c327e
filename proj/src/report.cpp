#include "kds/report.hpp"

#include <cmath>
#include <fstream>
#include <unordered_set>

#include "kds/errors.hpp"

namespace kds {

std::int64_t RunReport::quality_total() const {
    std::int64_t total = 0;
    for (const auto count : quality_histogram) total += count;
    return total;
}

std::int64_t RunReport::summary_total() const {
    return summary.selected + summary.rejected_quality +
           summary.rejected_diversity + summary.skipped;
}

int metric_bin(double value) {
    const double clamped = std::min(1.0, std::max(0.0, value));
    const int bin = static_cast<int>(std::floor(clamped * RunReport::kMetricBins));
    return std::min(RunReport::kMetricBins - 1, bin);
}

RunReport build_report(std::int64_t corpus_size,
                       const std::vector<SidecarRow>& sidecar,
                       const SelectionResult& selection,
                       const SelectionConfig& config) {
    if (static_cast<std::int64_t>(sidecar.size()) != corpus_size) {
        throw_config("report: sidecar has " + std::to_string(sidecar.size()) +
                     " rows for a corpus of " + std::to_string(corpus_size));
    }

    RunReport report;
    report.config_echo = config;
    report.corpus_size = corpus_size;

    std::unordered_set<std::string> sidecar_ids;
    for (const auto& row : sidecar) {
        if (!sidecar_ids.insert(row.scores.record_id).second) {
            throw_config("report: duplicate sidecar id " + row.scores.record_id);
        }
        if (row.scores.quality) {
            ++report.quality_histogram[static_cast<std::size_t>(*row.scores.quality)];
        } else {
            ++report.quality_histogram[6];
        }
        if (row.scores.ka) {
            ++report.ka_histogram[static_cast<std::size_t>(metric_bin(*row.scores.ka))];
        }
        if (row.scores.kc) {
            ++report.kc_histogram[static_cast<std::size_t>(metric_bin(*row.scores.kc))];
        }
    }

    for (const auto& id : selection.selected_ids) {
        if (!sidecar_ids.count(id)) {
            throw_config("report: selected id not in sidecar: " + id);
        }
    }

    report.summary.selected = static_cast<std::int64_t>(selection.selected_ids.size());
    for (const auto& [id, reason] : selection.rejected) {
        if (!sidecar_ids.count(id)) {
            throw_config("report: rejected id not in sidecar: " + id);
        }
        switch (reason) {
            case RejectReason::Quality:
                ++report.summary.rejected_quality;
                break;
            case RejectReason::Diversity:
                ++report.summary.rejected_diversity;
                break;
            case RejectReason::GenerationFailed:
            case RejectReason::QualityUnknown:
                ++report.summary.skipped;
                break;
        }
    }
    // Pool members never visited (budget met) complete the partition.
    const std::int64_t accounted = report.summary.selected +
                                   report.summary.rejected_quality +
                                   report.summary.rejected_diversity +
                                   report.summary.skipped;
    report.summary.skipped += corpus_size - accounted;
    report.summary.shortfall =
        std::max<std::int64_t>(0, config.k - report.summary.selected);
    return report;
}

void to_json(nlohmann::json& j, const RunReport& r) {
    nlohmann::json quality;
    for (int s = 0; s <= 5; ++s) {
        quality[std::to_string(s)] = r.quality_histogram[static_cast<std::size_t>(s)];
    }
    quality["unknown"] = r.quality_histogram[6];

    j = nlohmann::json{
        {"quality_histogram", quality},
        {"ka_histogram", r.ka_histogram},
        {"kc_histogram", r.kc_histogram},
        {"selection_summary",
         {{"selected", r.summary.selected},
          {"rejected_quality", r.summary.rejected_quality},
          {"rejected_diversity", r.summary.rejected_diversity},
          {"skipped", r.summary.skipped},
          {"shortfall", r.summary.shortfall}}},
        {"config", r.config_echo},
        {"corpus_size", r.corpus_size},
    };
}

void from_json(const nlohmann::json& j, RunReport& r) {
    const auto& quality = j.at("quality_histogram");
    for (int s = 0; s <= 5; ++s) {
        r.quality_histogram[static_cast<std::size_t>(s)] =
            quality.at(std::to_string(s)).get<std::int64_t>();
    }
    r.quality_histogram[6] = quality.at("unknown").get<std::int64_t>();
    j.at("ka_histogram").get_to(r.ka_histogram);
    j.at("kc_histogram").get_to(r.kc_histogram);
    const auto& summary = j.at("selection_summary");
    summary.at("selected").get_to(r.summary.selected);
    summary.at("rejected_quality").get_to(r.summary.rejected_quality);
    summary.at("rejected_diversity").get_to(r.summary.rejected_diversity);
    summary.at("skipped").get_to(r.summary.skipped);
    summary.at("shortfall").get_to(r.summary.shortfall);
    j.at("config").get_to(r.config_echo);
    j.at("corpus_size").get_to(r.corpus_size);
}

std::string report_to_csv(const RunReport& r) {
    std::string csv = "section,bin,count\n";
    for (int s = 0; s <= 5; ++s) {
        csv += "quality," + std::to_string(s) + "," +
               std::to_string(r.quality_histogram[static_cast<std::size_t>(s)]) + "\n";
    }
    csv += "quality,unknown," + std::to_string(r.quality_histogram[6]) + "\n";

    const auto bin_label = [](int bin) {
        const double lo = double(bin) / RunReport::kMetricBins;
        const double hi = double(bin + 1) / RunReport::kMetricBins;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "[%.2f;%.2f%c", lo, hi,
                      bin + 1 == RunReport::kMetricBins ? ']' : ')');
        return std::string(buf);
    };
    for (int b = 0; b < RunReport::kMetricBins; ++b) {
        csv += "ka," + bin_label(b) + "," +
               std::to_string(r.ka_histogram[static_cast<std::size_t>(b)]) + "\n";
    }
    for (int b = 0; b < RunReport::kMetricBins; ++b) {
        csv += "kc," + bin_label(b) + "," +
               std::to_string(r.kc_histogram[static_cast<std::size_t>(b)]) + "\n";
    }
    csv += "summary,selected," + std::to_string(r.summary.selected) + "\n";
    csv += "summary,rejected_quality," + std::to_string(r.summary.rejected_quality) + "\n";
    csv += "summary,rejected_diversity," + std::to_string(r.summary.rejected_diversity) + "\n";
    csv += "summary,skipped," + std::to_string(r.summary.skipped) + "\n";
    csv += "summary,shortfall," + std::to_string(r.summary.shortfall) + "\n";
    return csv;
}

void emit_report(const RunReport& report, const std::filesystem::path& dir,
                 const std::set<ReportFormat>& formats) {
    const auto write_file = [&](const std::filesystem::path& path,
                                const std::string& content) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw_io("cannot open for writing: " + path.string());
        out << content;
        if (!out) throw_io("write failed: " + path.string());
    };
    if (formats.count(ReportFormat::Json)) {
        write_file(dir / "report.json", nlohmann::json(report).dump(2) + "\n");
    }
    if (formats.count(ReportFormat::Csv)) {
        write_file(dir / "report.csv", report_to_csv(report));
    }
}

} // namespace kds
