// SPDX-License-Identifier: Apache-2.0
//
// use_eval: batch segmentation evaluation and random-model curves.

#include "segeval/study.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

int report_study(const segeval::StudyOutcome& out)
{
    if (out.exit_code == segeval::kExitConfigError) {
        std::cerr << "use_eval: " << out.message << '\n';
        return out.exit_code;
    }
    const auto& r = *out.report;
    for (const auto& w : r.warnings)
        std::cerr << "warning: " << w << '\n';
    for (const auto& c : r.cases)
        if (c.error)
            std::cerr << "case " << c.case_id << " failed: " << *c.error << '\n';
    std::cout << r.cases.size() << " cases, " << r.eligible_count() << " eligible, "
              << r.failed_count() << " failed\n";
    for (const auto& f : out.files)
        std::cout << "wrote " << f.string() << '\n';
    return out.exit_code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Segmentation evaluation over 3D voxel masks"};
    app.require_subcommand(0, 1);

    segeval::RunConfig config;
    std::vector<int> labels;
    std::string region, format = "both";
    app.add_option("--ref", config.ref_dir, "Reference mask directory");
    app.add_option("--pred", config.pred_dir, "Predicted mask directory");
    app.add_option("--experts", config.expert_dirs, "Expert annotation directory (repeat, >= 2)");
    app.add_option("--region", region, "Region-of-interest mask directory");
    app.add_option("--threshold-ml", config.threshold_ml, "Volume gate in ml")->capture_default_str();
    app.add_option("--tolerances-mm", config.tolerances_mm, "Surface tolerances in mm")
        ->delimiter(',')
        ->capture_default_str();
    app.add_option("--labels", labels, "Foreground labels (default 1)")->delimiter(',');
    app.add_flag("--all-nonzero", config.all_nonzero, "Treat every nonzero label as foreground");
    app.add_option("--reps", config.bootstrap.repetitions, "Bootstrap repetitions")->capture_default_str();
    app.add_option("--confidence", config.bootstrap.confidence, "Bootstrap confidence level")
        ->capture_default_str();
    app.add_option("--seed", config.bootstrap.seed, "Bootstrap seed")->capture_default_str();
    app.add_option("--out", config.out_dir, "Output directory");
    app.add_option("--format", format, "csv, json or both")->capture_default_str();

    segeval::RandomModelConfig rm;
    auto* random = app.add_subcommand("random-model", "Expected Dice of a random predictor over p");
    random->add_option("--p-grid", rm.p_grid, "Foreground fractions")->delimiter(',')->capture_default_str();
    random->add_option("--n", rm.n, "Voxel count")->capture_default_str();
    random->add_option("--samples", rm.samples, "Monte Carlo samples per point")->capture_default_str();
    random->add_flag("--exact", rm.exact, "Exact binomial summation instead of Monte Carlo");
    random->add_option("--seed", rm.seed, "Random seed")->capture_default_str();
    random->add_option("--out", rm.out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return segeval::kExitConfigError;
    }

    try {
        if (random->parsed()) {
            const auto out = segeval::run_random_model(rm);
            if (out.exit_code != segeval::kExitOk) {
                std::cerr << "use_eval: " << out.message << '\n';
                return out.exit_code;
            }
            std::cout << "wrote " << out.file.string() << '\n';
            if (!out.curve->monotone)
                std::cerr << "warning: e_d is not monotone over the p grid\n";
            return segeval::kExitOk;
        }

        if (!labels.empty())
            config.labels = std::set<int>(labels.begin(), labels.end());
        if (!region.empty())
            config.region_dir = region;
        try {
            config.format = segeval::parse_report_format(format);
        } catch (const std::invalid_argument& e) {
            std::cerr << "use_eval: " << e.what() << '\n';
            return segeval::kExitConfigError;
        }
        return report_study(segeval::run_study(config));
    } catch (const std::exception& e) {
        std::cerr << "use_eval: " << e.what() << '\n';
        return segeval::kExitConfigError;
    }
}
