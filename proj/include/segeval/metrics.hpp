// SPDX-License-Identifier: Apache-2.0
//
// Segmentation metrics: volume agreement (VS, AVD), overlap (Dice, IoU,
// recall, precision) and surface distance (HD95, ASSD, surface Dice at
// tolerance, boundary IoU). Empty-mask cases are reported as explicit
// undefined states, never as NaN.

#ifndef SEGEVAL_METRICS_HPP
#define SEGEVAL_METRICS_HPP

#include "segeval/mask.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace segeval {

enum class MetricStatus { Defined, UndefinedBothEmpty, UndefinedOneEmpty };

class MetricValue {
public:
    static MetricValue defined(double value) { return MetricValue(MetricStatus::Defined, value); }
    static MetricValue both_empty() { return MetricValue(MetricStatus::UndefinedBothEmpty, 0.0); }
    static MetricValue one_empty() { return MetricValue(MetricStatus::UndefinedOneEmpty, 0.0); }

    MetricStatus status() const { return status_; }
    bool is_defined() const { return status_ == MetricStatus::Defined; }
    /// Throws std::logic_error when not defined.
    double value() const;
    std::optional<double> as_optional() const
    {
        return is_defined() ? std::optional<double>(value_) : std::nullopt;
    }

    friend bool operator==(const MetricValue&, const MetricValue&) = default;

private:
    MetricValue(MetricStatus status, double value) : status_(status), value_(value) {}

    MetricStatus status_;
    double value_;
};

/// Report token for an undefined state ("NA_empty_both" / "NA_empty_one").
std::string_view undefined_token(MetricStatus status);

/// Tolerances (mm) for surface Dice and boundary IoU; strictly positive and increasing.
class ToleranceSpec {
public:
    ToleranceSpec() = default;
    explicit ToleranceSpec(std::vector<double> tolerances_mm);

    const std::vector<double>& values() const { return tolerances_; }
    std::size_t size() const { return tolerances_.size(); }

private:
    std::vector<double> tolerances_{2.0, 5.0};
};

MetricValue volumetric_similarity(const VoxelMask& ref, const VoxelMask& pred);
/// |V - V_hat| in ml.
MetricValue absolute_volume_difference(const VoxelMask& ref, const VoxelMask& pred);

struct OverlapMetrics {
    MetricValue dice = MetricValue::both_empty();
    MetricValue iou = MetricValue::both_empty();
    MetricValue recall = MetricValue::both_empty();
    MetricValue precision = MetricValue::both_empty();
};

OverlapMetrics overlap_metrics(const ConfusionCounts& counts);

double dice_to_iou(double dice);
double iou_to_dice(double iou);

/// Directed surface distances: for each reference surface voxel its distance
/// to the predicted surface, and vice versa (same order as SurfaceSet::voxels).
struct SurfaceDistances {
    std::vector<double> ref_to_pred;
    std::vector<double> pred_to_ref;
    bool ref_empty = true;
    bool pred_empty = true;
};

SurfaceDistances surface_distances(const SurfaceSet& ref_surface, const SurfaceSet& pred_surface);

MetricValue hausdorff_95(const SurfaceDistances& distances);
/// Exact (100th percentile) symmetric Hausdorff distance.
MetricValue hausdorff_max(const SurfaceDistances& distances);
MetricValue assd(const SurfaceDistances& distances);
/// Surface voxels within `tolerance_mm` (inclusive) of the other surface.
MetricValue surface_dice_at_tolerance(const SurfaceDistances& distances, double tolerance_mm);

MetricValue hausdorff_95(const SurfaceSet& ref_surface, const SurfaceSet& pred_surface);
MetricValue assd(const SurfaceSet& ref_surface, const SurfaceSet& pred_surface);
MetricValue surface_dice_at_tolerance(const SurfaceSet& ref_surface, const SurfaceSet& pred_surface,
                                      double tolerance_mm);

/// IoU of the boundary bands: mask voxels within `band_mm` of their own surface.
MetricValue boundary_iou(const VoxelMask& ref, const VoxelMask& pred, double band_mm);

/// Full metric suite for one reference/prediction pair. Distance fields are
/// computed once on the union bounding box and shared across metrics.
struct SegmentationMetrics {
    MetricValue vs = MetricValue::both_empty();
    MetricValue avd_ml = MetricValue::both_empty();
    OverlapMetrics overlap;
    MetricValue hd95_mm = MetricValue::both_empty();
    MetricValue assd_mm = MetricValue::both_empty();
    std::vector<MetricValue> sdt;  ///< one per tolerance
    std::vector<MetricValue> biou; ///< one per tolerance
};

SegmentationMetrics evaluate_segmentation(const VoxelMask& ref, const VoxelMask& pred,
                                          const ToleranceSpec& tolerances);

} // namespace segeval

#endif // SEGEVAL_METRICS_HPP
