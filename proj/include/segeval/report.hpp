// SPDX-License-Identifier: Apache-2.0
//
// Study report model and its CSV/JSON serialization. Column order is fixed
// and documented in README.md; undefined values are written as
// NA_empty_both, NA_empty_one or NA, never as NaN.

#ifndef SEGEVAL_REPORT_HPP
#define SEGEVAL_REPORT_HPP

#include "segeval/classification.hpp"
#include "segeval/fusion.hpp"
#include "segeval/metrics.hpp"
#include "segeval/random_model.hpp"
#include "segeval/stats.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace segeval {

inline constexpr const char* kToolVersion = "1.0.0";

struct CaseResult {
    std::string case_id;
    std::optional<std::string> error; ///< set when the case could not be evaluated

    double v_ref_ml = 0.0;
    double v_pred_ml = 0.0;
    GateDecision gate;
    std::optional<SegmentationMetrics> metrics; ///< segmentation-eligible cases only
    std::optional<MetricValue> u_score;         ///< expert runs only
    std::optional<AgreementTables> agreement;   ///< expert runs only
    std::optional<VoxelImbalance> imbalance;    ///< region runs only

    bool ok() const { return !error.has_value(); }
};

struct SummaryRow {
    std::string metric;
    std::size_t n = 0;
    std::optional<ConfidenceInterval> mean;
    std::optional<ConfidenceInterval> median;
    std::string status; ///< "ok", "no_eligible_cases", "no_defined_values", "not_computed"
};

struct ClassificationRow {
    std::string metric;
    std::optional<double> value;
    std::optional<ConfidenceInterval> ci;
};

struct ClassificationSummary {
    ClassificationTally tally;
    ClassificationMetrics metrics;
    std::optional<double> auc;
    ImageImbalance imbalance;
    std::vector<ClassificationRow> rows; ///< serialized order
};

struct RunMetadata {
    std::string tool_version = kToolVersion;
    std::string ref_dir;
    std::string pred_dir;
    std::vector<std::string> expert_dirs;
    std::string region_dir;
    std::string out_dir;
    std::string format;
    double threshold_ml = 0.0;
    std::vector<double> tolerances_mm;
    std::string labels; ///< "all_nonzero" or comma list
    int repetitions = 1000;
    double confidence = 0.95;
    std::uint64_t seed = 42;
};

struct StudyReport {
    RunMetadata metadata;
    ToleranceSpec tolerances;
    std::vector<CaseResult> cases;
    std::vector<SummaryRow> summary;
    ClassificationSummary classification;
    std::optional<CorrelationMatrix> correlations;
    std::vector<std::string> warnings;

    std::size_t eligible_count() const;
    std::size_t failed_count() const;
};

enum class ReportFormat { Csv, Json, Both };

ReportFormat parse_report_format(const std::string& name);
std::string to_string(ReportFormat format);

/// Segmentation metric column names for a tolerance list, in report order.
std::vector<std::string> metric_names(const ToleranceSpec& tolerances);
/// Values of one metric suite in the order of metric_names().
std::vector<MetricValue> metric_values(const SegmentationMetrics& m);

/// Shortest round-trip decimal; "NA" for non-finite input.
std::string format_number(double value);
std::string format_metric(const MetricValue& value);

std::vector<std::string> per_case_columns(const ToleranceSpec& tolerances);

std::string per_case_csv(const StudyReport& report);
std::string summary_csv(const StudyReport& report);
std::string classification_csv(const StudyReport& report);
std::string correlations_csv(const StudyReport& report);
std::string agreement_csv(const StudyReport& report);
std::string study_json(const StudyReport& report);

/// Columns p, n, e_d, std_error, method.
std::string dice_curve_csv(const DiceCurve& curve);

/// Writes per_case.csv, summary.csv, classification.csv, correlations.csv
/// and agreement.csv (Csv), study.json (Json), or all of them (Both).
/// Returns the written paths.
std::vector<std::filesystem::path> write_report(const StudyReport& report,
                                                const std::filesystem::path& out_dir,
                                                ReportFormat format);

} // namespace segeval

#endif // SEGEVAL_REPORT_HPP
