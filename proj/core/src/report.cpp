#include <cstdio>
#include <fstream>

#include "credrag/dataset_io.hpp"
#include "credrag/error.hpp"
#include "credrag/harness.hpp"

namespace credrag::harness {

ReportFormat parse_report_format(std::string_view s) {
    if (s == "json") return ReportFormat::Json;
    if (s == "csv") return ReportFormat::Csv;
    if (s == "markdown" || s == "md") return ReportFormat::Markdown;
    throw ConfigError("unknown report format '" + std::string(s) + "'");
}

std::string extension(ReportFormat f) {
    switch (f) {
        case ReportFormat::Json: return ".json";
        case ReportFormat::Csv: return ".csv";
        case ReportFormat::Markdown: return ".md";
    }
    return "";
}

namespace {

nlohmann::ordered_json aggregates_json(const Aggregates& a) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : a) j[k] = v;
    return j;
}

nlohmann::ordered_json items_json(const std::vector<metrics::ScoredItem>& items) {
    auto j = nlohmann::ordered_json::array();
    for (const auto& s : items) j.push_back(metrics::to_json(s));
    return j;
}

std::vector<metrics::ScoredItem> items_from(const nlohmann::json& j) {
    std::vector<metrics::ScoredItem> out;
    for (const auto& s : j) out.push_back(metrics::scored_item_from_json(s));
    return out;
}

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string ratio_label(double r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", r);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string optional_number(const std::optional<double>& v) {
    if (!v) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", *v);
    return buf;
}

}  // namespace

nlohmann::ordered_json to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["manifest"] = to_json(report.manifest, false);
    j["aggregates"] = aggregates_json(report.aggregates);
    j["error_count"] = report.error_count;
    j["items"] = items_json(report.items);
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : report.per_ratio) {
        nlohmann::ordered_json rj;
        rj["ratio"] = r.ratio;
        rj["aggregates"] = aggregates_json(r.aggregates);
        rj["error_count"] = r.error_count;
        rj["items"] = items_json(r.items);
        rows.push_back(std::move(rj));
    }
    j["per_ratio"] = std::move(rows);
    return j;
}

nlohmann::ordered_json to_json(const std::vector<EvalReport>& reports) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    nlohmann::ordered_json j;
    j["reports"] = std::move(arr);
    return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
    EvalReport r;
    try {
        r.manifest = manifest_from_json(j.at("manifest"));
        r.aggregates = j.at("aggregates").get<Aggregates>();
        r.error_count = j.at("error_count").get<std::size_t>();
        r.items = items_from(j.at("items"));
        for (const auto& rj : j.at("per_ratio")) {
            RatioBreakdown row;
            row.ratio = rj.at("ratio").get<double>();
            row.aggregates = rj.at("aggregates").get<Aggregates>();
            row.error_count = rj.at("error_count").get<std::size_t>();
            row.items = items_from(rj.at("items"));
            r.per_ratio.push_back(std::move(row));
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed report: ") + e.what());
    }
    return r;
}

std::vector<EvalReport> reports_from_json(const nlohmann::json& j) {
    if (!j.contains("reports") || !j["reports"].is_array()) throw SchemaError("report file lacks a reports array");
    std::vector<EvalReport> out;
    for (const auto& r : j["reports"]) out.push_back(report_from_json(r));
    return out;
}

std::string render_report(const std::vector<EvalReport>& reports, ReportFormat format) {
    switch (format) {
        case ReportFormat::Json: return to_json(reports).dump(2) + "\n";

        case ReportFormat::Csv: {
            std::string out = "item_id,strategy,dataset,ratio,em,rouge_l,mc_correct,error\n";
            auto emit = [&](const EvalReport& r, const std::string& ratio, const std::vector<metrics::ScoredItem>& items) {
                for (const auto& s : items) {
                    out += csv_field(s.item_id) + ',' + csv_field(r.manifest.strategy) + ',' +
                           csv_field(r.manifest.dataset_name) + ',' + ratio + ',' + optional_number(s.em) + ',' +
                           optional_number(s.rouge_l) + ',' +
                           (s.mc_correct ? (*s.mc_correct ? "1" : "0") : "") + ',' + csv_field(s.error.value_or("")) +
                           '\n';
                }
            };
            for (const auto& r : reports) {
                if (!r.is_sweep()) emit(r, "", r.items);
                for (const auto& row : r.per_ratio) emit(r, ratio_label(row.ratio), row.items);
            }
            return out;
        }

        case ReportFormat::Markdown: {
            static const std::pair<const char*, const char*> kColumns[] = {
                {"em", "EM"}, {"rouge_l", "Rouge-L"}, {"mc_accuracy", "MC accuracy"}};
            std::vector<std::pair<const char*, const char*>> cols;
            for (const auto& col : kColumns) {
                bool present = false;
                for (const auto& r : reports) {
                    present |= r.aggregates.contains(col.first);
                    for (const auto& row : r.per_ratio) present |= row.aggregates.contains(col.first);
                }
                if (present) cols.push_back(col);
            }
            std::string out = "| Strategy | Dataset | Noise ratio |";
            for (const auto& c : cols) out += std::string(" ") + c.second + " |";
            out += " Items | Errors |\n|---|---|---|";
            for (std::size_t i = 0; i < cols.size(); ++i) out += "---|";
            out += "---|---|\n";
            auto row_line = [&](const EvalReport& r, const std::string& ratio, const Aggregates& agg, std::size_t n,
                                std::size_t errors) {
                out += "| " + r.manifest.strategy + " | " + r.manifest.dataset_name + " | " + ratio + " |";
                for (const auto& c : cols) {
                    auto it = agg.find(c.first);
                    out += " " + (it == agg.end() ? std::string("-") : fixed3(it->second)) + " |";
                }
                out += " " + std::to_string(n) + " | " + std::to_string(errors) + " |\n";
            };
            for (const auto& r : reports) {
                if (!r.is_sweep()) row_line(r, "-", r.aggregates, r.items.size(), r.error_count);
                for (const auto& row : r.per_ratio) {
                    row_line(r, ratio_label(row.ratio), row.aggregates, row.items.size(), row.error_count);
                }
            }
            return out;
        }
    }
    return {};
}

void emit_report(const std::vector<EvalReport>& reports, ReportFormat format, const std::filesystem::path& path) {
    write_file_atomic(path, render_report(reports, format));
}

void write_run_outputs(const std::vector<EvalReport>& reports, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "'");
    for (auto f : {ReportFormat::Json, ReportFormat::Csv, ReportFormat::Markdown}) {
        emit_report(reports, f, dir / ("report" + extension(f)));
    }
    auto manifests = nlohmann::ordered_json::array();
    for (const auto& r : reports) manifests.push_back(to_json(r.manifest, true));
    write_file_atomic(dir / "manifest.json", manifests.dump(2) + "\n");
}

std::vector<EvalReport> load_reports(const std::filesystem::path& report_json) {
    try {
        return reports_from_json(nlohmann::json::parse(read_file(report_json)));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("malformed report '" + report_json.string() + "': " + e.what());
    }
}

}  // namespace credrag::harness
