// SPDX-License-Identifier: Apache-2.0

#include "segeval/report.hpp"

#include <json.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace segeval {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::size_t StudyReport::eligible_count() const
{
    std::size_t n = 0;
    for (const auto& c : cases)
        n += (c.ok() && c.gate.segmentation_eligible) ? 1 : 0;
    return n;
}

std::size_t StudyReport::failed_count() const
{
    std::size_t n = 0;
    for (const auto& c : cases)
        n += c.ok() ? 0 : 1;
    return n;
}

ReportFormat parse_report_format(const std::string& name)
{
    if (name == "csv")
        return ReportFormat::Csv;
    if (name == "json")
        return ReportFormat::Json;
    if (name == "both")
        return ReportFormat::Both;
    throw std::invalid_argument("unknown report format '" + name + "' (csv, json, both)");
}

std::string to_string(ReportFormat format)
{
    switch (format) {
    case ReportFormat::Csv:
        return "csv";
    case ReportFormat::Json:
        return "json";
    case ReportFormat::Both:
        break;
    }
    return "both";
}

std::string format_number(double value)
{
    if (!std::isfinite(value))
        return "NA";
    if (value == 0.0)
        value = 0.0; // drop the sign of -0
    std::array<char, 64> buf;
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), end);
}

std::string format_metric(const MetricValue& value)
{
    if (value.is_defined())
        return format_number(value.value());
    return std::string(undefined_token(value.status()));
}

std::vector<std::string> metric_names(const ToleranceSpec& tolerances)
{
    std::vector<std::string> names{"vs",        "avd_ml",  "dice",   "iou",
                                   "recall",    "precision", "hd95_mm", "assd_mm"};
    for (double t : tolerances.values())
        names.push_back("sdt_" + format_number(t) + "mm");
    for (double t : tolerances.values())
        names.push_back("biou_" + format_number(t) + "mm");
    return names;
}

std::vector<MetricValue> metric_values(const SegmentationMetrics& m)
{
    std::vector<MetricValue> v{m.vs,
                               m.avd_ml,
                               m.overlap.dice,
                               m.overlap.iou,
                               m.overlap.recall,
                               m.overlap.precision,
                               m.hd95_mm,
                               m.assd_mm};
    v.insert(v.end(), m.sdt.begin(), m.sdt.end());
    v.insert(v.end(), m.biou.begin(), m.biou.end());
    return v;
}

std::vector<std::string> per_case_columns(const ToleranceSpec& tolerances)
{
    std::vector<std::string> cols{"case_id",   "status",     "error",    "eligible",
                                  "true_label", "pred_label", "v_ref_ml", "v_pred_ml"};
    for (auto& name : metric_names(tolerances))
        cols.push_back(std::move(name));
    for (const char* c : {"u_score", "ir", "p"})
        cols.emplace_back(c);
    return cols;
}

namespace {

const std::string kNA = "NA";

// A report cell: a number, or a text token (NA tags, labels, ids).
struct Cell {
    std::optional<double> number;
    std::string text;

    static Cell num(double v) { return Cell{v, {}}; }
    static Cell str(std::string s) { return Cell{std::nullopt, std::move(s)}; }
    static Cell na() { return str(kNA); }
    static Cell opt(const std::optional<double>& v) { return v ? num(*v) : na(); }
    static Cell metric(const MetricValue& v)
    {
        return v.is_defined() ? num(v.value()) : str(std::string(undefined_token(v.status())));
    }
    static Cell flag(bool b) { return str(b ? "true" : "false"); }

    std::string csv() const { return number ? format_number(*number) : text; }
    ojson json() const
    {
        if (number && std::isfinite(*number))
            return *number == 0.0 ? ojson(0.0) : ojson(*number);
        return number ? ojson(kNA) : ojson(text);
    }
};

using Row = std::vector<Cell>;

std::string escape_csv(const std::string& s)
{
    if (s.find_first_of(",\"\n\r") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + '"';
}

std::string render_csv(const std::vector<std::string>& header, const std::vector<Row>& rows)
{
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i)
        out += (i ? "," : "") + escape_csv(header[i]);
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out += (i ? "," : "") + escape_csv(row[i].csv());
        out += '\n';
    }
    return out;
}

ojson render_json(const std::vector<std::string>& header, const std::vector<Row>& rows)
{
    ojson arr = ojson::array();
    for (const auto& row : rows) {
        ojson obj = ojson::object();
        for (std::size_t i = 0; i < row.size(); ++i)
            obj[header[i]] = row[i].json();
        arr.push_back(std::move(obj));
    }
    return arr;
}

std::vector<Row> per_case_rows(const StudyReport& report)
{
    const std::size_t n_metrics = metric_names(report.tolerances).size();
    std::vector<Row> rows;
    for (const auto& c : report.cases) {
        Row row{Cell::str(c.case_id)};
        if (!c.ok()) {
            row.push_back(Cell::str("error"));
            row.push_back(Cell::str(*c.error));
            row.resize(per_case_columns(report.tolerances).size(), Cell::na());
            rows.push_back(std::move(row));
            continue;
        }
        row.push_back(Cell::str("ok"));
        row.push_back(Cell::na());
        row.push_back(Cell::flag(c.gate.segmentation_eligible));
        row.push_back(Cell::str(c.gate.label.true_label ? "positive" : "negative"));
        row.push_back(Cell::str(c.gate.label.pred_label ? "positive" : "negative"));
        row.push_back(Cell::num(c.v_ref_ml));
        row.push_back(Cell::num(c.v_pred_ml));
        if (c.metrics) {
            for (const auto& v : metric_values(*c.metrics))
                row.push_back(Cell::metric(v));
        } else {
            row.insert(row.end(), n_metrics, Cell::na());
        }
        row.push_back(c.u_score ? Cell::metric(*c.u_score) : Cell::na());
        row.push_back(c.imbalance ? Cell::opt(c.imbalance->ir) : Cell::na());
        row.push_back(c.imbalance ? Cell::opt(c.imbalance->p) : Cell::na());
        rows.push_back(std::move(row));
    }
    return rows;
}

const std::vector<std::string> kSummaryColumns{"metric",       "n",      "mean",
                                               "mean_ci_lo",   "mean_ci_hi", "median",
                                               "median_ci_lo", "median_ci_hi", "status"};

std::vector<Row> summary_rows(const StudyReport& report)
{
    std::vector<Row> rows;
    for (const auto& s : report.summary) {
        Row row{Cell::str(s.metric), Cell::num(static_cast<double>(s.n))};
        for (const auto& ci : {s.mean, s.median}) {
            if (ci) {
                row.push_back(Cell::num(ci->point));
                row.push_back(Cell::num(ci->lo));
                row.push_back(Cell::num(ci->hi));
            } else {
                row.insert(row.end(), 3, Cell::na());
            }
        }
        row.push_back(Cell::str(s.status));
        rows.push_back(std::move(row));
    }
    return rows;
}

const std::vector<std::string> kClassificationColumns{"metric", "value", "ci_lo", "ci_hi"};

std::vector<Row> classification_rows(const StudyReport& report)
{
    std::vector<Row> rows;
    for (const auto& r : report.classification.rows) {
        Row row{Cell::str(r.metric), Cell::opt(r.value)};
        if (r.ci) {
            row.push_back(Cell::num(r.ci->lo));
            row.push_back(Cell::num(r.ci->hi));
        } else {
            row.insert(row.end(), 2, Cell::na());
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

const std::vector<std::string> kCorrelationColumns{"var_x", "var_y", "n", "rho", "p_value",
                                                   "insignificant"};

std::vector<Row> correlation_rows(const StudyReport& report)
{
    std::vector<Row> rows;
    if (!report.correlations)
        return rows;
    const auto& m = *report.correlations;
    const auto k = static_cast<Eigen::Index>(m.names.size());
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) {
            Row row{Cell::str(m.names[static_cast<std::size_t>(i)]),
                    Cell::str(m.names[static_cast<std::size_t>(j)]),
                    Cell::num(static_cast<double>(m.n(i, j)))};
            if (m.defined(i, j)) {
                row.push_back(Cell::num(m.rho(i, j)));
                row.push_back(Cell::num(m.p_value(i, j)));
                row.push_back(Cell::flag(m.insignificant(i, j)));
            } else {
                row.insert(row.end(), 3, Cell::na());
            }
            rows.push_back(std::move(row));
        }
    return rows;
}

std::vector<std::string> agreement_columns(const ToleranceSpec& tolerances)
{
    std::vector<std::string> cols{"case_id", "kind", "ref", "pred"};
    for (auto& name : metric_names(tolerances))
        cols.push_back(std::move(name));
    return cols;
}

std::vector<Row> agreement_rows(const StudyReport& report)
{
    std::vector<Row> rows;
    auto expert = [](std::size_t e) { return Cell::str("expert_" + std::to_string(e)); };
    for (const auto& c : report.cases) {
        if (!c.ok() || !c.agreement)
            continue;
        for (const auto* table : {&c.agreement->inter_expert, &c.agreement->majority_expert})
            for (const auto& pair : *table) {
                Row row{Cell::str(c.case_id),
                        Cell::str(pair.ref_is_majority ? "majority_expert" : "inter_expert"),
                        pair.ref_is_majority ? Cell::str("majority") : expert(pair.ref_expert),
                        expert(pair.pred_expert)};
                for (const auto& v : metric_values(pair.metrics))
                    row.push_back(Cell::metric(v));
                rows.push_back(std::move(row));
            }
    }
    return rows;
}

ojson metadata_json(const RunMetadata& m)
{
    ojson j = ojson::object();
    j["tool_version"] = m.tool_version;
    j["ref_dir"] = m.ref_dir;
    j["pred_dir"] = m.pred_dir;
    j["expert_dirs"] = m.expert_dirs;
    j["region_dir"] = m.region_dir.empty() ? ojson(nullptr) : ojson(m.region_dir);
    j["out_dir"] = m.out_dir;
    j["format"] = m.format;
    j["threshold_ml"] = m.threshold_ml;
    j["tolerances_mm"] = m.tolerances_mm;
    j["labels"] = m.labels;
    j["bootstrap_repetitions"] = m.repetitions;
    j["confidence"] = m.confidence;
    j["seed"] = m.seed;
    return j;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error(path.string() + ": cannot open for writing");
    out << text;
    if (!out)
        throw std::runtime_error(path.string() + ": write failed");
}

} // namespace

std::string per_case_csv(const StudyReport& report)
{
    return render_csv(per_case_columns(report.tolerances), per_case_rows(report));
}

std::string summary_csv(const StudyReport& report)
{
    return render_csv(kSummaryColumns, summary_rows(report));
}

std::string classification_csv(const StudyReport& report)
{
    return render_csv(kClassificationColumns, classification_rows(report));
}

std::string correlations_csv(const StudyReport& report)
{
    return render_csv(kCorrelationColumns, correlation_rows(report));
}

std::string agreement_csv(const StudyReport& report)
{
    return render_csv(agreement_columns(report.tolerances), agreement_rows(report));
}

std::string study_json(const StudyReport& report)
{
    ojson j = ojson::object();
    j["metadata"] = metadata_json(report.metadata);
    j["per_case"] = render_json(per_case_columns(report.tolerances), per_case_rows(report));
    j["summary"] = render_json(kSummaryColumns, summary_rows(report));
    j["classification"] = render_json(kClassificationColumns, classification_rows(report));
    j["correlations"] = render_json(kCorrelationColumns, correlation_rows(report));
    j["agreement"] = render_json(agreement_columns(report.tolerances), agreement_rows(report));

    ojson failures = ojson::array();
    for (const auto& c : report.cases)
        if (!c.ok())
            failures.push_back({{"case_id", c.case_id}, {"error", *c.error}});
    j["failures"] = std::move(failures);
    j["warnings"] = report.warnings;
    return j.dump(2) + "\n";
}

std::string dice_curve_csv(const DiceCurve& curve)
{
    std::vector<Row> rows;
    for (const auto& p : curve.points)
        rows.push_back({Cell::num(p.p), Cell::str(std::to_string(p.n)), Cell::num(p.e_d),
                        Cell::num(p.std_error), Cell::str(p.method)});
    return render_csv({"p", "n", "e_d", "std_error", "method"}, rows);
}

std::vector<fs::path> write_report(const StudyReport& report, const fs::path& out_dir,
                                   ReportFormat format)
{
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir))
        throw std::runtime_error("cannot create output directory " + out_dir.string() +
                                 (ec ? ": " + ec.message() : ""));

    std::vector<fs::path> written;
    auto emit = [&](const char* name, const std::string& text) {
        write_text(out_dir / name, text);
        written.push_back(out_dir / name);
    };
    if (format != ReportFormat::Json) {
        emit("per_case.csv", per_case_csv(report));
        emit("summary.csv", summary_csv(report));
        emit("classification.csv", classification_csv(report));
        emit("correlations.csv", correlations_csv(report));
        emit("agreement.csv", agreement_csv(report));
    }
    if (format != ReportFormat::Csv)
        emit("study.json", study_json(report));
    return written;
}

} // namespace segeval
