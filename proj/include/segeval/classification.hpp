// SPDX-License-Identifier: Apache-2.0
//
// Volume-threshold gating of cases, image-level classification metrics and
// voxel-/image-level class imbalance ratios.

#ifndef SEGEVAL_CLASSIFICATION_HPP
#define SEGEVAL_CLASSIFICATION_HPP

#include "segeval/mask.hpp"

#include <optional>
#include <span>
#include <vector>

namespace segeval {

/// Lower volume threshold in ml; 0 disables gating.
class ThresholdGate {
public:
    ThresholdGate() = default;
    explicit ThresholdGate(double threshold_ml);

    double threshold_ml() const { return threshold_ml_; }
    /// Positive iff volume >= threshold (volume > 0 when the gate is disabled).
    bool positive(double volume_ml) const;

private:
    double threshold_ml_ = 0.0;
};

struct CaseLabel {
    bool true_label = false; ///< reference volume passes the gate
    bool pred_label = false; ///< predicted volume passes the gate
    double score = 0.0;      ///< predicted volume (ml), continuous score for AUC
};

struct GateDecision {
    bool segmentation_eligible = false;
    CaseLabel label;
};

/// Eligible iff both volumes pass the threshold; with threshold 0 every case is eligible.
GateDecision gate_case(double v_ref_ml, double v_pred_ml, const ThresholdGate& gate);

struct ClassificationTally {
    std::size_t tp_i = 0;
    std::size_t tn_i = 0;
    std::size_t fp_i = 0;
    std::size_t fn_i = 0;
    std::vector<CaseLabel> cases;

    std::size_t total() const { return tp_i + tn_i + fp_i + fn_i; }
};

ClassificationTally tally(std::span<const CaseLabel> cases);

struct ClassificationMetrics {
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    std::optional<double> f1;
    std::optional<double> acc;
};

ClassificationMetrics classification_metrics(const ClassificationTally& t);

/// Mann-Whitney AUC of the score against the true label, ties credited one
/// half. nullopt unless both classes are present.
std::optional<double> auc(std::span<const CaseLabel> cases);

struct ImageImbalance {
    std::optional<double> ir_i; ///< positives / negatives
    std::optional<double> p_i;  ///< 1 / (1 + ir_i)
};

ImageImbalance image_imbalance(const ClassificationTally& t);

struct VoxelImbalance {
    std::optional<double> ir; ///< region background / target voxels
    std::optional<double> p;  ///< 1 / (1 + ir)
    std::size_t target_outside_region = 0;
};

VoxelImbalance voxel_imbalance(const VoxelMask& ref, const VoxelMask& region);

} // namespace segeval

#endif // SEGEVAL_CLASSIFICATION_HPP
