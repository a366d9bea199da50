// SPDX-License-Identifier: Apache-2.0

#include "segeval/classification.hpp"

#include "segeval/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace segeval {

ThresholdGate::ThresholdGate(double threshold_ml) : threshold_ml_(threshold_ml)
{
    if (!std::isfinite(threshold_ml) || threshold_ml < 0.0)
        throw std::invalid_argument("volume threshold must be finite and >= 0");
}

bool ThresholdGate::positive(double volume_ml) const
{
    if (threshold_ml_ == 0.0)
        return volume_ml > 0.0;
    return volume_ml >= threshold_ml_;
}

GateDecision gate_case(double v_ref_ml, double v_pred_ml, const ThresholdGate& gate)
{
    if (v_ref_ml < 0.0 || v_pred_ml < 0.0)
        throw std::invalid_argument("gate_case: volumes must be >= 0");
    GateDecision d;
    d.label.true_label = gate.positive(v_ref_ml);
    d.label.pred_label = gate.positive(v_pred_ml);
    d.label.score = v_pred_ml;
    d.segmentation_eligible = gate.threshold_ml() == 0.0 ||
                              (v_ref_ml >= gate.threshold_ml() && v_pred_ml >= gate.threshold_ml());
    return d;
}

ClassificationTally tally(std::span<const CaseLabel> cases)
{
    ClassificationTally t;
    t.cases.assign(cases.begin(), cases.end());
    for (const auto& c : cases) {
        if (c.true_label && c.pred_label)
            ++t.tp_i;
        else if (c.true_label)
            ++t.fn_i;
        else if (c.pred_label)
            ++t.fp_i;
        else
            ++t.tn_i;
    }
    return t;
}

namespace {

std::optional<double> safe_ratio(std::size_t num, std::size_t den)
{
    if (den == 0)
        return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

ClassificationMetrics classification_metrics(const ClassificationTally& t)
{
    ClassificationMetrics m;
    m.sensitivity = safe_ratio(t.tp_i, t.tp_i + t.fn_i);
    m.specificity = safe_ratio(t.tn_i, t.tn_i + t.fp_i);
    m.f1 = safe_ratio(2 * t.tp_i, 2 * t.tp_i + t.fp_i + t.fn_i);
    m.acc = safe_ratio(t.tp_i + t.tn_i, t.total());
    return m;
}

std::optional<double> auc(std::span<const CaseLabel> cases)
{
    std::vector<double> scores;
    std::size_t positives = 0;
    scores.reserve(cases.size());
    for (const auto& c : cases) {
        scores.push_back(c.score);
        positives += c.true_label ? 1 : 0;
    }
    const std::size_t negatives = cases.size() - positives;
    if (positives == 0 || negatives == 0)
        return std::nullopt;

    // U = sum of positive ranks - n+(n+ + 1)/2, with mid-ranks for ties.
    const auto ranks = midranks(scores);
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < cases.size(); ++i)
        if (cases[i].true_label)
            rank_sum += ranks[i];
    const double np = static_cast<double>(positives);
    const double u = rank_sum - np * (np + 1.0) / 2.0;
    return u / (np * static_cast<double>(negatives));
}

ImageImbalance image_imbalance(const ClassificationTally& t)
{
    ImageImbalance out;
    out.ir_i = safe_ratio(t.tp_i + t.fn_i, t.tn_i + t.fp_i);
    if (out.ir_i)
        out.p_i = 1.0 / (1.0 + *out.ir_i);
    return out;
}

VoxelImbalance voxel_imbalance(const VoxelMask& ref, const VoxelMask& region)
{
    require_same_geometry(ref.geometry(), region.geometry(), "reference and region");
    std::size_t target = 0, background = 0;
    VoxelImbalance out;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const bool r = ref[i] != 0;
        const bool in_region = region[i] != 0;
        target += r ? 1 : 0;
        background += (in_region && !r) ? 1 : 0;
        out.target_outside_region += (r && !in_region) ? 1 : 0;
    }
    out.ir = safe_ratio(background, target);
    if (out.ir)
        out.p = 1.0 / (1.0 + *out.ir);
    return out;
}

} // namespace segeval
