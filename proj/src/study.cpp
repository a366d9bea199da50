// SPDX-License-Identifier: Apache-2.0

#include "segeval/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace segeval {

namespace fs = std::filesystem;

void validate(const RunConfig& config)
{
    auto require_dir = [](const fs::path& p, const char* role) {
        if (p.empty())
            throw ConfigError(std::string(role) + " directory is required");
        if (!fs::is_directory(p))
            throw ConfigError(std::string(role) + " directory does not exist: " + p.string());
    };
    require_dir(config.ref_dir, "reference");
    require_dir(config.pred_dir, "prediction");
    for (const auto& d : config.expert_dirs)
        require_dir(d, "expert");
    if (config.expert_dirs.size() == 1)
        throw ConfigError("expert evaluation needs at least two expert directories");
    if (config.region_dir)
        require_dir(*config.region_dir, "region");
    if (config.out_dir.empty())
        throw ConfigError("output directory is required");

    if (!std::isfinite(config.threshold_ml) || config.threshold_ml < 0.0)
        throw ConfigError("threshold must be a finite volume >= 0 ml");
    try {
        ToleranceSpec{config.tolerances_mm};
        config.bootstrap.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!config.all_nonzero) {
        if (config.labels.empty())
            throw ConfigError("label set must not be empty (or use all-nonzero)");
        for (int l : config.labels)
            if (l < 1 || l > 255)
                throw ConfigError("labels must lie in [1, 255], got " + std::to_string(l));
    }
}

std::size_t worker_count(std::size_t requested)
{
    if (requested > 0)
        return requested;
    if (const char* env = std::getenv("USE_EVAL_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
            return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

VoxelMask load_binary(const fs::path& path, const RunConfig& config)
{
    const VoxelMask mask = read_mask(path);
    return config.all_nonzero ? binarize_nonzero(mask) : binarize(mask, config.labels);
}

std::string label_description(const RunConfig& config)
{
    if (config.all_nonzero)
        return "all_nonzero";
    std::string out;
    for (int l : config.labels)
        out += (out.empty() ? "" : ",") + std::to_string(l);
    return out;
}

RunMetadata metadata_for(const RunConfig& config)
{
    RunMetadata m;
    m.ref_dir = config.ref_dir.string();
    m.pred_dir = config.pred_dir.string();
    for (const auto& d : config.expert_dirs)
        m.expert_dirs.push_back(d.string());
    m.region_dir = config.region_dir ? config.region_dir->string() : "";
    m.out_dir = config.out_dir.string();
    m.format = to_string(config.format);
    m.threshold_ml = config.threshold_ml;
    m.tolerances_mm = config.tolerances_mm;
    m.labels = label_description(config);
    m.repetitions = config.bootstrap.repetitions;
    m.confidence = config.bootstrap.confidence;
    m.seed = config.bootstrap.seed;
    return m;
}

BootstrapSpec seeded(const BootstrapSpec& base, std::uint64_t stream)
{
    BootstrapSpec s = base;
    s.seed = derive_seed(base.seed, stream);
    return s;
}

SummaryRow summarize(std::string name, const std::vector<double>& values, const BootstrapSpec& spec,
                     std::string empty_status)
{
    SummaryRow row;
    row.metric = std::move(name);
    row.n = values.size();
    if (values.empty()) {
        row.status = std::move(empty_status);
        return row;
    }
    row.mean = bootstrap_ci(values, Statistic::Mean, spec);
    row.median = bootstrap_ci(values, Statistic::Median, spec);
    row.status = "ok";
    return row;
}

std::vector<double> defined_values(const std::vector<std::optional<double>>& column)
{
    std::vector<double> out;
    for (const auto& v : column)
        if (v)
            out.push_back(*v);
    return out;
}

ClassificationSummary classify(const std::vector<CaseResult>& cases, const RunConfig& config,
                               std::size_t eligible)
{
    std::vector<CaseLabel> labels;
    std::size_t failed = 0;
    for (const auto& c : cases) {
        if (c.ok())
            labels.push_back(c.gate.label);
        else
            ++failed;
    }

    ClassificationSummary s;
    s.tally = tally(labels);
    s.metrics = classification_metrics(s.tally);
    s.auc = auc(labels);
    s.imbalance = image_imbalance(s.tally);

    auto count = [](std::size_t v) { return std::optional<double>(static_cast<double>(v)); };
    s.rows.push_back({"threshold_ml", config.threshold_ml, std::nullopt});
    s.rows.push_back({"cases", count(labels.size()), std::nullopt});
    s.rows.push_back({"eligible_cases", count(eligible), std::nullopt});
    s.rows.push_back({"gated_cases", count(labels.size() - eligible), std::nullopt});
    s.rows.push_back({"failed_cases", count(failed), std::nullopt});
    s.rows.push_back({"tp_i", count(s.tally.tp_i), std::nullopt});
    s.rows.push_back({"tn_i", count(s.tally.tn_i), std::nullopt});
    s.rows.push_back({"fp_i", count(s.tally.fp_i), std::nullopt});
    s.rows.push_back({"fn_i", count(s.tally.fn_i), std::nullopt});

    using Extract = std::optional<double> (*)(std::span<const CaseLabel>);
    const std::vector<std::pair<const char*, Extract>> rated{
        {"sensitivity", [](std::span<const CaseLabel> l) { return classification_metrics(tally(l)).sensitivity; }},
        {"specificity", [](std::span<const CaseLabel> l) { return classification_metrics(tally(l)).specificity; }},
        {"f1", [](std::span<const CaseLabel> l) { return classification_metrics(tally(l)).f1; }},
        {"acc", [](std::span<const CaseLabel> l) { return classification_metrics(tally(l)).acc; }},
        {"auc", [](std::span<const CaseLabel> l) { return auc(l); }},
    };
    for (std::size_t r = 0; r < rated.size(); ++r) {
        const auto extract = rated[r].second;
        auto statistic = [&](std::span<const std::size_t> idx) {
            std::vector<CaseLabel> resample;
            resample.reserve(idx.size());
            for (auto i : idx)
                resample.push_back(labels[i]);
            return extract(resample);
        };
        s.rows.push_back({rated[r].first, extract(labels),
                          bootstrap_ci(labels.size(), statistic, seeded(config.bootstrap, 500 + r))});
    }
    s.rows.push_back({"ir_i", s.imbalance.ir_i, std::nullopt});
    s.rows.push_back({"p_i", s.imbalance.p_i, std::nullopt});
    return s;
}

} // namespace

CaseResult evaluate_case(const CaseBinding& binding, const RunConfig& config,
                         const ToleranceSpec& tolerances)
{
    CaseResult r;
    r.case_id = binding.case_id;
    try {
        const VoxelMask ref = load_binary(binding.ref_path, config);
        const VoxelMask pred = load_binary(binding.pred_path, config);
        require_same_geometry(ref.geometry(), pred.geometry(), "reference and prediction");

        r.v_ref_ml = volume_ml(ref);
        r.v_pred_ml = volume_ml(pred);
        r.gate = gate_case(r.v_ref_ml, r.v_pred_ml, ThresholdGate(config.threshold_ml));
        if (r.gate.segmentation_eligible)
            r.metrics = evaluate_segmentation(ref, pred, tolerances);

        if (!binding.expert_paths.empty()) {
            std::vector<VoxelMask> experts;
            for (const auto& p : binding.expert_paths) {
                experts.push_back(load_binary(p, config));
                require_same_geometry(ref.geometry(), experts.back().geometry(),
                                      "reference and expert");
            }
            const ExpertSet set(std::move(experts));
            const auto u = u_score(set);
            r.u_score = u ? MetricValue::defined(*u) : MetricValue::both_empty();
            r.agreement = agreement_tables(set, tolerances);
        }
        if (binding.region_path) {
            const VoxelMask region = binarize_nonzero(read_mask(*binding.region_path));
            r.imbalance = voxel_imbalance(ref, region);
        }
    } catch (const std::exception& e) {
        CaseResult failed;
        failed.case_id = binding.case_id;
        failed.error = e.what();
        return failed;
    }
    return r;
}

StudyReport assemble_report(const RunConfig& config, std::vector<CaseResult> cases,
                            std::vector<std::string> warnings)
{
    StudyReport report;
    report.metadata = metadata_for(config);
    report.tolerances = ToleranceSpec(config.tolerances_mm);
    report.cases = std::move(cases);
    report.warnings = std::move(warnings);

    const auto names = metric_names(report.tolerances);
    const std::size_t eligible = report.eligible_count();
    const bool experts = !config.expert_dirs.empty();
    const bool region = config.region_dir.has_value();

    // Per-metric columns over segmentation-eligible cases.
    std::vector<std::vector<std::optional<double>>> metric_columns(names.size());
    std::vector<std::optional<double>> v_ref, v_pred, u_col, p_col, ir_col;
    for (const auto& c : report.cases) {
        if (!c.ok() || !c.gate.segmentation_eligible)
            continue;
        const auto values = metric_values(*c.metrics);
        for (std::size_t k = 0; k < names.size(); ++k)
            metric_columns[k].push_back(values[k].as_optional());
        v_ref.push_back(c.v_ref_ml);
        v_pred.push_back(c.v_pred_ml);
        u_col.push_back(c.u_score ? c.u_score->as_optional() : std::nullopt);
        ir_col.push_back(c.imbalance ? c.imbalance->ir : std::nullopt);
        p_col.push_back(c.imbalance ? c.imbalance->p : std::nullopt);
    }

    const std::string seg_empty = eligible == 0 ? "no_eligible_cases" : "no_defined_values";
    std::uint64_t stream = 0;
    for (std::size_t k = 0; k < names.size(); ++k)
        report.summary.push_back(summarize(names[k], defined_values(metric_columns[k]),
                                           seeded(config.bootstrap, stream++), seg_empty));
    report.summary.push_back(
        summarize("v_ref_ml", defined_values(v_ref), seeded(config.bootstrap, stream++), seg_empty));
    report.summary.push_back(
        summarize("v_pred_ml", defined_values(v_pred), seeded(config.bootstrap, stream++), seg_empty));

    // Dataset-level uncertainty and imbalance use every evaluated case.
    std::vector<std::optional<double>> u_all, ir_all, p_all;
    std::vector<std::vector<double>> inter(names.size()), majority(names.size());
    for (const auto& c : report.cases) {
        if (!c.ok())
            continue;
        if (c.u_score)
            u_all.push_back(c.u_score->as_optional());
        if (c.imbalance) {
            ir_all.push_back(c.imbalance->ir);
            p_all.push_back(c.imbalance->p);
        }
        if (c.agreement) {
            for (const auto& pair : c.agreement->inter_expert) {
                const auto values = metric_values(pair.metrics);
                for (std::size_t k = 0; k < names.size(); ++k)
                    if (values[k].is_defined())
                        inter[k].push_back(values[k].value());
            }
            for (const auto& pair : c.agreement->majority_expert) {
                const auto values = metric_values(pair.metrics);
                for (std::size_t k = 0; k < names.size(); ++k)
                    if (values[k].is_defined())
                        majority[k].push_back(values[k].value());
            }
        }
    }
    const std::string expert_empty = experts ? "no_defined_values" : "not_computed";
    const std::string region_empty = region ? "no_defined_values" : "not_computed";
    report.summary.push_back(
        summarize("u_score", defined_values(u_all), seeded(config.bootstrap, stream++), expert_empty));
    for (std::size_t k = 0; k < names.size(); ++k)
        report.summary.push_back(summarize("inter_expert_" + names[k], inter[k],
                                           seeded(config.bootstrap, stream++), expert_empty));
    for (std::size_t k = 0; k < names.size(); ++k)
        report.summary.push_back(summarize("majority_expert_" + names[k], majority[k],
                                           seeded(config.bootstrap, stream++), expert_empty));
    report.summary.push_back(
        summarize("ir", defined_values(ir_all), seeded(config.bootstrap, stream++), region_empty));
    report.summary.push_back(
        summarize("p", defined_values(p_all), seeded(config.bootstrap, stream++), region_empty));

    report.classification = classify(report.cases, config, eligible);

    std::vector<NamedColumn> columns{{"u_score", u_col}, {"v_ref_ml", v_ref}, {"p", p_col}};
    for (std::size_t k = 0; k < names.size(); ++k)
        columns.push_back({names[k], metric_columns[k]});
    report.correlations = correlation_matrix(columns);
    return report;
}

StudyReport evaluate_study(const RunConfig& config)
{
    validate(config);
    BindResult bound;
    try {
        bound = bind_cases(config.ref_dir, config.pred_dir, config.expert_dirs, config.region_dir);
    } catch (const BindError& e) {
        throw ConfigError(e.what());
    }
    const ToleranceSpec tolerances(config.tolerances_mm);

    std::vector<CaseResult> results(bound.cases.size());
    const std::size_t workers = std::min(worker_count(config.threads), std::max<std::size_t>(1, results.size()));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < results.size(); i = next++)
            results[i] = evaluate_case(bound.cases[i], config, tolerances);
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < workers; ++t)
            pool.emplace_back(work);
    }
    return assemble_report(config, std::move(results), std::move(bound.warnings));
}

StudyOutcome run_study(const RunConfig& config)
{
    StudyOutcome out;
    try {
        out.report = evaluate_study(config);
    } catch (const ConfigError& e) {
        out.exit_code = kExitConfigError;
        out.message = e.what();
        return out;
    }
    out.files = write_report(*out.report, config.out_dir, config.format);
    out.exit_code = out.report->failed_count() > 0 ? kExitCaseErrors : kExitOk;
    return out;
}

void validate(const RandomModelConfig& config)
{
    if (config.p_grid.empty())
        throw ConfigError("p grid must not be empty");
    for (double p : config.p_grid) {
        if (!(p > 0.0 && p < 1.0))
            throw ConfigError("p grid values must lie in (0, 1)");
        if (std::round(p * static_cast<double>(config.n)) < 1.0)
            throw ConfigError("p*n must round to at least one reference voxel (p=" +
                              format_number(p) + ", n=" + std::to_string(config.n) + ")");
    }
    if (config.n < 1)
        throw ConfigError("n must be >= 1");
    if (config.exact && config.n > kMaxBinomialN)
        throw ConfigError("exact summation supports n <= " + std::to_string(kMaxBinomialN));
    if (!config.exact && config.samples < 100)
        throw ConfigError("Monte Carlo needs at least 100 samples");
    if (config.out_dir.empty())
        throw ConfigError("output directory is required");
}

RandomModelOutcome run_random_model(const RandomModelConfig& config)
{
    RandomModelOutcome out;
    try {
        validate(config);
    } catch (const ConfigError& e) {
        out.exit_code = kExitConfigError;
        out.message = e.what();
        return out;
    }
    out.curve = dice_vs_p_curve(config.p_grid, config.n, config.samples, config.seed, config.exact);

    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    out.file = config.out_dir / "dice_vs_p.csv";
    std::ofstream f(out.file, std::ios::binary | std::ios::trunc);
    if (!f)
        throw std::runtime_error(out.file.string() + ": cannot open for writing");
    f << dice_curve_csv(*out.curve);
    return out;
}

} // namespace segeval
