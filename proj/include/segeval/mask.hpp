// SPDX-License-Identifier: Apache-2.0
//
// Voxel-grid data model: geometry, label masks, confusion counting, surface
// extraction and exact anisotropic Euclidean distance fields.

#ifndef SEGEVAL_MASK_HPP
#define SEGEVAL_MASK_HPP

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace segeval {

using Index3 = Eigen::Array3i;
using Spacing3 = Eigen::Array3d;

/// Raised when two grids that must be voxel-aligned are not.
class ShapeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Grid extent (x fastest) and physical voxel size in millimeters.
class Geometry {
public:
    Geometry(int width, int height, int depth, double sx = 1.0, double sy = 1.0, double sz = 1.0);
    Geometry(const Index3& dims, const Spacing3& spacing);

    const Index3& dims() const { return dims_; }
    const Spacing3& spacing() const { return spacing_; }
    int width() const { return dims_.x(); }
    int height() const { return dims_.y(); }
    int depth() const { return dims_.z(); }

    std::size_t voxel_count() const
    {
        return static_cast<std::size_t>(dims_.x()) * dims_.y() * dims_.z();
    }

    /// mm^3 -> ml
    double voxel_volume_ml() const { return spacing_.x() * spacing_.y() * spacing_.z() / 1000.0; }

    std::size_t index(int x, int y, int z) const
    {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(dims_.x()) * (static_cast<std::size_t>(y) +
                                                      static_cast<std::size_t>(dims_.y()) * z);
    }
    std::size_t index(const Index3& c) const { return index(c.x(), c.y(), c.z()); }
    Index3 coord(std::size_t index) const;
    bool contains(const Index3& c) const { return (c >= 0).all() && (c < dims_).all(); }

    /// Same dims, spacings equal within `rel_tol` relative difference.
    bool matches(const Geometry& other, double rel_tol = 1e-4) const;
    std::string describe() const;

private:
    Index3 dims_;
    Spacing3 spacing_;
};

/// Dense label grid. Class ids are stored with 8-bit semantics.
class VoxelMask {
public:
    using Label = std::uint8_t;

    explicit VoxelMask(Geometry geometry);
    VoxelMask(Geometry geometry, std::vector<Label> labels);

    const Geometry& geometry() const { return geometry_; }
    const std::vector<Label>& labels() const { return labels_; }
    std::size_t size() const { return labels_.size(); }

    Label operator[](std::size_t i) const { return labels_[i]; }
    Label at(int x, int y, int z) const { return labels_[geometry_.index(x, y, z)]; }
    void set(int x, int y, int z, Label value) { labels_[geometry_.index(x, y, z)] = value; }
    void set(std::size_t i, Label value) { labels_[i] = value; }

    bool is_binary() const;
    std::size_t count_positive() const;
    bool empty() const { return count_positive() == 0; }

    friend bool operator==(const VoxelMask& a, const VoxelMask& b)
    {
        return a.geometry_.matches(b.geometry_, 0.0) && a.labels_ == b.labels_;
    }

private:
    Geometry geometry_;
    std::vector<Label> labels_;
};

/// Voxel-level cardinalities of a binary reference/prediction pair.
struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const { return tp + fp + fn + tn; }
    std::uint64_t reference_positive() const { return tp + fn; }
    std::uint64_t predicted_positive() const { return tp + fp; }

    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Surface voxels of one binary mask, as sorted linear indices into its grid.
struct SurfaceSet {
    Geometry geometry;
    std::vector<std::size_t> voxels;

    bool empty() const { return voxels.empty(); }
    std::size_t size() const { return voxels.size(); }
};

/// Per-voxel distance (mm) to the nearest voxel of a surface set.
/// Infinite everywhere when the surface set is empty.
struct DistanceField {
    Geometry geometry;
    std::vector<double> values;

    double operator[](std::size_t i) const { return values[i]; }
    double at(int x, int y, int z) const { return values[geometry.index(x, y, z)]; }
};

/// Throws ShapeError naming both geometries when they differ.
void require_same_geometry(const Geometry& a, const Geometry& b, const char* what = "masks");

/// Binary mask: 1 where the label is in `class_set`.
VoxelMask binarize(const VoxelMask& mask, const std::set<int>& class_set);
/// Binary mask: 1 where the label is non-zero.
VoxelMask binarize_nonzero(const VoxelMask& mask);

ConfusionCounts confusion(const VoxelMask& ref, const VoxelMask& pred);
/// Counts restricted to voxels where `region` is positive.
ConfusionCounts confusion(const VoxelMask& ref, const VoxelMask& pred, const VoxelMask& region);

double volume_ml(const VoxelMask& mask);

/// Positive voxels with at least one face neighbour that is negative or
/// outside the grid.
SurfaceSet extract_surface(const VoxelMask& mask);

/// Exact Euclidean distance transform with per-axis spacing (separable
/// lower-envelope algorithm on squared distances).
DistanceField distance_field(const SurfaceSet& target);

/// Axis-aligned box [lo, hi] inclusive; empty() when no voxel is positive.
struct VoxelBox {
    Index3 lo = Index3::Zero();
    Index3 hi = Index3::Constant(-1);

    bool empty() const { return (hi < lo).any(); }
    Index3 extent() const { return hi - lo + 1; }
};

VoxelBox bounding_box(const VoxelMask& mask);
VoxelBox merge(const VoxelBox& a, const VoxelBox& b);
/// Copy of the voxels inside `box`, spacing preserved.
VoxelMask crop(const VoxelMask& mask, const VoxelBox& box);

} // namespace segeval

#endif // SEGEVAL_MASK_HPP
