#include "aqua/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "aqua/errors.hpp"
#include "aqua/image_io.hpp"

namespace aqua {

namespace {

using MetricField = std::optional<double> ScoreReport::*;

struct MetricColumn {
    const char* name;
    MetricField field;
};

// Fixed column order shared by the JSON and CSV writers.
constexpr std::array<MetricColumn, 13> kColumns = {{
    {"psnr", &ScoreReport::psnr},
    {"ssim", &ScoreReport::ssim},
    {"l1", &ScoreReport::l1},
    {"psnr_t", &ScoreReport::psnr_t},
    {"mae_t", &ScoreReport::mae_t},
    {"psnr_b", &ScoreReport::psnr_b},
    {"mae_b", &ScoreReport::mae_b},
    {"uiqm", &ScoreReport::uiqm},
    {"loss_j", &ScoreReport::loss_j},
    {"loss_t", &ScoreReport::loss_t},
    {"loss_b", &ScoreReport::loss_b},
    {"loss_rec", &ScoreReport::loss_rec},
    {"composite", &ScoreReport::composite},
}};

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

} // namespace

std::string score_report_to_json(const ScoreReport& report, const LossWeights& weights) {
    nlohmann::json doc;
    doc["id"] = report.id;
    bool bitwise_equal = false;
    for (const MetricColumn& col : kColumns) {
        const std::optional<double>& value = report.*(col.field);
        // Unset fields are omitted; null is reserved for the infinity
        // sentinel so the two stay distinguishable on parse.
        if (!value) continue;
        if (std::isinf(*value)) {
            doc[col.name] = nullptr;
            bitwise_equal = true;
        } else {
            doc[col.name] = *value;
        }
    }
    doc["bitwise_equal"] = bitwise_equal;
    doc["weights"] = {{"lambda_j", weights.lambda_j},
                      {"lambda_t", weights.lambda_t},
                      {"lambda_b", weights.lambda_b},
                      {"lambda_l", weights.lambda_l}};
    return doc.dump(2) + "\n";
}

ScoreReport score_report_from_json(const std::string& json_text) {
    ScoreReport report;
    try {
        const nlohmann::json doc = nlohmann::json::parse(json_text);
        report.id = doc.at("id").get<std::string>();
        const bool bitwise_equal = doc.value("bitwise_equal", false);
        for (const MetricColumn& col : kColumns) {
            if (!doc.contains(col.name)) continue;
            if (doc[col.name].is_null()) {
                // Null is only ever written for the infinity sentinel.
                if (bitwise_equal) {
                    report.*(col.field) = std::numeric_limits<double>::infinity();
                }
                continue;
            }
            report.*(col.field) = doc[col.name].get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(std::string("score report: ") + e.what());
    }
    return report;
}

std::map<std::string, SummaryStat> summarize_reports(const std::vector<ScoreReport>& reports) {
    std::map<std::string, SummaryStat> summary;
    for (const MetricColumn& col : kColumns) {
        SummaryStat stat;
        std::vector<double> finite;
        for (const ScoreReport& report : reports) {
            const std::optional<double>& value = report.*(col.field);
            if (!value) continue;
            ++stat.count;
            if (std::isfinite(*value)) finite.push_back(*value);
        }
        stat.finite_count = static_cast<int>(finite.size());
        if (!finite.empty()) {
            double sum = 0.0;
            for (double v : finite) sum += v;
            stat.mean = sum / static_cast<double>(finite.size());
            double sq = 0.0;
            for (double v : finite) sq += (v - stat.mean) * (v - stat.mean);
            stat.stddev = std::sqrt(sq / static_cast<double>(finite.size()));
            std::sort(finite.begin(), finite.end());
            const std::size_t mid = finite.size() / 2;
            stat.median = finite.size() % 2 == 1
                              ? finite[mid]
                              : 0.5 * (finite[mid - 1] + finite[mid]);
        }
        if (stat.count > 0) summary[col.name] = stat;
    }
    return summary;
}

void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<ScoreReport>& reports, const LossWeights& weights) {
    const std::map<std::string, SummaryStat> summary = summarize_reports(reports);

    std::ostringstream out;
    out << "# aggregate scores over " << reports.size() << " image pairs\n";
    out << "# psnr in dB (peak 1.0; +inf bitwise-equal sentinel excluded, see finite_count),"
           " ssim 11x11 gaussian sigma=1.5 on Rec.709 luminance\n";
    out << "# uiqm on the 8-bit sRGB rendering; losses are L1 + (1-SSIM)\n";
    out << "# loss weights: lambda_j=" << format_double(weights.lambda_j)
        << " lambda_t=" << format_double(weights.lambda_t)
        << " lambda_b=" << format_double(weights.lambda_b)
        << " lambda_l=" << format_double(weights.lambda_l) << "\n";
    out << "metric,count,finite_count,mean,median,stddev\n";
    for (const MetricColumn& col : kColumns) {
        const auto it = summary.find(col.name);
        if (it == summary.end()) continue;
        const SummaryStat& stat = it->second;
        out << col.name << "," << stat.count << "," << stat.finite_count << ",";
        if (stat.finite_count > 0) {
            out << format_double(stat.mean) << "," << format_double(stat.median) << ","
                << format_double(stat.stddev);
        } else {
            out << ",,";
        }
        out << "\n";
    }
    atomic_write_text(path, out.str());
}

} // namespace aqua
