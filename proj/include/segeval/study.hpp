// SPDX-License-Identifier: Apache-2.0
//
// Study orchestration: case binding -> per-case evaluation -> gating ->
// statistics -> report, plus the random-model curve run.

#ifndef SEGEVAL_STUDY_HPP
#define SEGEVAL_STUDY_HPP

#include "segeval/io.hpp"
#include "segeval/random_model.hpp"
#include "segeval/report.hpp"

#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

namespace segeval {

/// Invalid run configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitCaseErrors = 1;
inline constexpr int kExitConfigError = 2;

struct RunConfig {
    std::filesystem::path ref_dir;
    std::filesystem::path pred_dir;
    std::vector<std::filesystem::path> expert_dirs;
    std::optional<std::filesystem::path> region_dir;
    double threshold_ml = 0.0;
    std::vector<double> tolerances_mm{2.0, 5.0};
    std::set<int> labels{1};
    bool all_nonzero = false;
    BootstrapSpec bootstrap;
    std::filesystem::path out_dir;
    ReportFormat format = ReportFormat::Both;
    std::size_t threads = 0; ///< 0: USE_EVAL_THREADS, else hardware concurrency
};

/// Throws ConfigError describing the first problem found.
void validate(const RunConfig& config);

/// Worker count: explicit setting, then USE_EVAL_THREADS, then hardware concurrency.
std::size_t worker_count(std::size_t requested);

/// Evaluates one bound case. Failures are captured in CaseResult::error.
CaseResult evaluate_case(const CaseBinding& binding, const RunConfig& config,
                         const ToleranceSpec& tolerances);

/// Aggregates evaluated cases into a complete report (summary, classification,
/// correlations, metadata).
StudyReport assemble_report(const RunConfig& config, std::vector<CaseResult> cases,
                            std::vector<std::string> warnings = {});

/// Validates, binds and evaluates every case. Does not write files.
StudyReport evaluate_study(const RunConfig& config);

struct StudyOutcome {
    std::optional<StudyReport> report; ///< absent on configuration errors
    int exit_code = kExitOk;
    std::vector<std::filesystem::path> files;
    std::string message; ///< diagnostic for exit code 2
};

/// Full run including report writing. Exit 0 on success, 1 when any case
/// failed (report still written), 2 on configuration/binding errors (nothing written).
StudyOutcome run_study(const RunConfig& config);

struct RandomModelConfig {
    std::vector<double> p_grid{0.01, 0.05, 0.1, 0.25, 0.5};
    std::uint64_t n = 1000000;
    std::uint64_t samples = 10000;
    std::uint64_t seed = 42;
    bool exact = false;
    std::filesystem::path out_dir;
};

void validate(const RandomModelConfig& config);

struct RandomModelOutcome {
    std::optional<DiceCurve> curve;
    int exit_code = kExitOk;
    std::filesystem::path file;
    std::string message;
};

/// Computes the curve and writes dice_vs_p.csv into out_dir.
RandomModelOutcome run_random_model(const RandomModelConfig& config);

} // namespace segeval

#endif // SEGEVAL_STUDY_HPP
