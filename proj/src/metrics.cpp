// SPDX-License-Identifier: Apache-2.0

#include "segeval/metrics.hpp"

#include "segeval/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace segeval {

double MetricValue::value() const
{
    if (!is_defined())
        throw std::logic_error("value() on an undefined metric (" +
                               std::string(undefined_token(status_)) + ")");
    return value_;
}

std::string_view undefined_token(MetricStatus status)
{
    switch (status) {
    case MetricStatus::UndefinedBothEmpty:
        return "NA_empty_both";
    case MetricStatus::UndefinedOneEmpty:
        return "NA_empty_one";
    case MetricStatus::Defined:
        break;
    }
    return "defined";
}

ToleranceSpec::ToleranceSpec(std::vector<double> tolerances_mm) : tolerances_(std::move(tolerances_mm))
{
    if (tolerances_.empty())
        throw std::invalid_argument("tolerance list must not be empty");
    for (std::size_t i = 0; i < tolerances_.size(); ++i) {
        if (!(tolerances_[i] > 0.0) || !std::isfinite(tolerances_[i]))
            throw std::invalid_argument("tolerances must be finite and > 0");
        if (i > 0 && !(tolerances_[i] > tolerances_[i - 1]))
            throw std::invalid_argument("tolerances must be strictly increasing");
    }
}

namespace {

std::optional<MetricValue> emptiness(bool a_empty, bool b_empty)
{
    if (a_empty && b_empty)
        return MetricValue::both_empty();
    if (a_empty || b_empty)
        return MetricValue::one_empty();
    return std::nullopt;
}

double ratio(std::uint64_t num, std::uint64_t den)
{
    return static_cast<double>(num) / static_cast<double>(den);
}

VoxelBox surface_box(const SurfaceSet& s)
{
    VoxelBox box;
    if (s.empty())
        return box;
    box.lo = s.geometry.dims();
    for (std::size_t i : s.voxels) {
        const Index3 c = s.geometry.coord(i);
        box.lo = box.lo.min(c);
        box.hi = box.hi.max(c);
    }
    return box;
}

// Re-expresses a surface set inside a sub-box of its grid.
SurfaceSet restrict_to(const SurfaceSet& s, const VoxelBox& box)
{
    SurfaceSet out{Geometry(box.extent(), s.geometry.spacing()), {}};
    out.voxels.reserve(s.voxels.size());
    for (std::size_t i : s.voxels)
        out.voxels.push_back(out.geometry.index(s.geometry.coord(i) - box.lo));
    return out;
}

std::vector<double> sample(const DistanceField& field, const SurfaceSet& at)
{
    std::vector<double> out;
    out.reserve(at.voxels.size());
    for (std::size_t i : at.voxels)
        out.push_back(field[i]);
    return out;
}

// Both masks cropped to their union bounding box with surfaces and
// distance fields. Only valid when both masks are non-empty.
struct PairFields {
    VoxelMask ref;
    VoxelMask pred;
    SurfaceSet ref_surface;
    SurfaceSet pred_surface;
    DistanceField to_ref;
    DistanceField to_pred;
};

PairFields pair_fields(const VoxelMask& ref, const VoxelMask& pred)
{
    const VoxelBox box = merge(bounding_box(ref), bounding_box(pred));
    VoxelMask r = crop(ref, box);
    VoxelMask p = crop(pred, box);
    SurfaceSet rs = extract_surface(r);
    SurfaceSet ps = extract_surface(p);
    DistanceField to_ref = distance_field(rs);
    DistanceField to_pred = distance_field(ps);
    return PairFields{std::move(r), std::move(p), std::move(rs), std::move(ps), std::move(to_ref),
                      std::move(to_pred)};
}

MetricValue boundary_iou_from(const PairFields& f, double band_mm)
{
    std::uint64_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < f.ref.size(); ++i) {
        const bool in_ref = f.ref[i] != 0 && f.to_ref[i] <= band_mm;
        const bool in_pred = f.pred[i] != 0 && f.to_pred[i] <= band_mm;
        inter += (in_ref && in_pred) ? 1 : 0;
        uni += (in_ref || in_pred) ? 1 : 0;
    }
    return MetricValue::defined(ratio(inter, uni));
}

void require_tolerance(double t)
{
    if (!(t > 0.0) || !std::isfinite(t))
        throw std::invalid_argument("tolerance must be finite and > 0");
}

} // namespace

MetricValue volumetric_similarity(const VoxelMask& ref, const VoxelMask& pred)
{
    require_same_geometry(ref.geometry(), pred.geometry(), "reference and prediction");
    const double v = volume_ml(ref);
    const double v_hat = volume_ml(pred);
    if (v + v_hat == 0.0)
        return MetricValue::defined(1.0);
    return MetricValue::defined(1.0 - std::abs(v_hat - v) / (v_hat + v));
}

MetricValue absolute_volume_difference(const VoxelMask& ref, const VoxelMask& pred)
{
    require_same_geometry(ref.geometry(), pred.geometry(), "reference and prediction");
    return MetricValue::defined(std::abs(volume_ml(ref) - volume_ml(pred)));
}

OverlapMetrics overlap_metrics(const ConfusionCounts& c)
{
    OverlapMetrics m;
    const std::uint64_t union_den = c.tp + c.fn + c.fp;
    if (union_den == 0)
        return m; // all four both-empty

    m.dice = MetricValue::defined(ratio(2 * c.tp, 2 * c.tp + c.fn + c.fp));
    m.iou = MetricValue::defined(ratio(c.tp, union_den));
    m.recall = c.tp + c.fn == 0 ? MetricValue::one_empty()
                                : MetricValue::defined(ratio(c.tp, c.tp + c.fn));
    m.precision = c.tp + c.fp == 0 ? MetricValue::one_empty()
                                   : MetricValue::defined(ratio(c.tp, c.tp + c.fp));
    return m;
}

double dice_to_iou(double dice)
{
    return dice / (2.0 - dice);
}

double iou_to_dice(double iou)
{
    return 2.0 * iou / (1.0 + iou);
}

SurfaceDistances surface_distances(const SurfaceSet& ref_surface, const SurfaceSet& pred_surface)
{
    require_same_geometry(ref_surface.geometry, pred_surface.geometry, "surfaces");
    SurfaceDistances out;
    out.ref_empty = ref_surface.empty();
    out.pred_empty = pred_surface.empty();
    if (out.ref_empty || out.pred_empty)
        return out;

    const VoxelBox box = merge(surface_box(ref_surface), surface_box(pred_surface));
    const SurfaceSet r = restrict_to(ref_surface, box);
    const SurfaceSet p = restrict_to(pred_surface, box);
    out.ref_to_pred = sample(distance_field(p), r);
    out.pred_to_ref = sample(distance_field(r), p);
    return out;
}

MetricValue hausdorff_95(const SurfaceDistances& d)
{
    if (auto e = emptiness(d.ref_empty, d.pred_empty))
        return *e;
    return MetricValue::defined(
        std::max(percentile(d.ref_to_pred, 0.95), percentile(d.pred_to_ref, 0.95)));
}

MetricValue hausdorff_max(const SurfaceDistances& d)
{
    if (auto e = emptiness(d.ref_empty, d.pred_empty))
        return *e;
    return MetricValue::defined(
        std::max(*std::max_element(d.ref_to_pred.begin(), d.ref_to_pred.end()),
                 *std::max_element(d.pred_to_ref.begin(), d.pred_to_ref.end())));
}

MetricValue assd(const SurfaceDistances& d)
{
    if (auto e = emptiness(d.ref_empty, d.pred_empty))
        return *e;
    const double total = std::accumulate(d.ref_to_pred.begin(), d.ref_to_pred.end(), 0.0) +
                         std::accumulate(d.pred_to_ref.begin(), d.pred_to_ref.end(), 0.0);
    return MetricValue::defined(total /
                                static_cast<double>(d.ref_to_pred.size() + d.pred_to_ref.size()));
}

MetricValue surface_dice_at_tolerance(const SurfaceDistances& d, double tolerance_mm)
{
    require_tolerance(tolerance_mm);
    if (auto e = emptiness(d.ref_empty, d.pred_empty))
        return *e;
    auto within = [&](const std::vector<double>& v) {
        return static_cast<std::uint64_t>(
            std::count_if(v.begin(), v.end(), [&](double x) { return x <= tolerance_mm; }));
    };
    return MetricValue::defined(ratio(within(d.pred_to_ref) + within(d.ref_to_pred),
                                      d.pred_to_ref.size() + d.ref_to_pred.size()));
}

MetricValue hausdorff_95(const SurfaceSet& ref_surface, const SurfaceSet& pred_surface)
{
    return hausdorff_95(surface_distances(ref_surface, pred_surface));
}

MetricValue assd(const SurfaceSet& ref_surface, const SurfaceSet& pred_surface)
{
    return assd(surface_distances(ref_surface, pred_surface));
}

MetricValue surface_dice_at_tolerance(const SurfaceSet& ref_surface, const SurfaceSet& pred_surface,
                                      double tolerance_mm)
{
    return surface_dice_at_tolerance(surface_distances(ref_surface, pred_surface), tolerance_mm);
}

MetricValue boundary_iou(const VoxelMask& ref, const VoxelMask& pred, double band_mm)
{
    require_same_geometry(ref.geometry(), pred.geometry(), "reference and prediction");
    require_tolerance(band_mm);
    if (auto e = emptiness(ref.empty(), pred.empty()))
        return *e;
    return boundary_iou_from(pair_fields(ref, pred), band_mm);
}

SegmentationMetrics evaluate_segmentation(const VoxelMask& ref, const VoxelMask& pred,
                                          const ToleranceSpec& tolerances)
{
    SegmentationMetrics m;
    m.vs = volumetric_similarity(ref, pred);
    m.avd_ml = absolute_volume_difference(ref, pred);
    const ConfusionCounts counts = confusion(ref, pred);
    m.overlap = overlap_metrics(counts);

    const bool ref_empty = counts.reference_positive() == 0;
    const bool pred_empty = counts.predicted_positive() == 0;
    if (auto e = emptiness(ref_empty, pred_empty)) {
        m.hd95_mm = m.assd_mm = *e;
        m.sdt.assign(tolerances.size(), *e);
        m.biou.assign(tolerances.size(), *e);
        return m;
    }

    const PairFields f = pair_fields(ref, pred);
    SurfaceDistances d;
    d.ref_empty = d.pred_empty = false;
    d.ref_to_pred = sample(f.to_pred, f.ref_surface);
    d.pred_to_ref = sample(f.to_ref, f.pred_surface);

    m.hd95_mm = hausdorff_95(d);
    m.assd_mm = assd(d);
    for (double t : tolerances.values()) {
        m.sdt.push_back(surface_dice_at_tolerance(d, t));
        m.biou.push_back(boundary_iou_from(f, t));
    }
    return m;
}

} // namespace segeval
