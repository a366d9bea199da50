// SPDX-License-Identifier: Apache-2.0

#include "segeval/mask.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace segeval {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate(const Index3& dims, const Spacing3& spacing)
{
    if ((dims < 1).any()) {
        std::ostringstream os;
        os << "geometry: dims must be >= 1, got (" << dims.x() << ", " << dims.y() << ", "
           << dims.z() << ")";
        throw std::invalid_argument(os.str());
    }
    if (!(spacing > 0.0).all() || !spacing.isFinite().all()) {
        std::ostringstream os;
        os << "geometry: spacing must be finite and > 0, got (" << spacing.x() << ", "
           << spacing.y() << ", " << spacing.z() << ")";
        throw std::invalid_argument(os.str());
    }
}

// One-dimensional squared distance transform along a line with stride.
// f holds squared distances so far (inf where no site); w is the axis spacing.
void edt_line(double* data, std::size_t n, std::size_t stride, double w, std::vector<double>& f,
              std::vector<int>& v, std::vector<double>& z)
{
    for (std::size_t i = 0; i < n; ++i)
        f[i] = data[i * stride];

    int k = -1;
    for (int q = 0; q < static_cast<int>(n); ++q) {
        if (f[q] == kInf)
            continue;
        const double xq = w * q;
        while (k >= 0) {
            const double xv = w * v[k];
            const double s = ((f[q] + xq * xq) - (f[v[k]] + xv * xv)) / (2.0 * (xq - xv));
            if (s <= z[k]) {
                --k;
                continue;
            }
            ++k;
            v[k] = q;
            z[k] = s;
            z[k + 1] = kInf;
            break;
        }
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -kInf;
            z[1] = kInf;
        }
    }

    if (k < 0)
        return; // no site on this line, leave inf

    k = 0;
    for (int q = 0; q < static_cast<int>(n); ++q) {
        const double xq = w * q;
        while (z[k + 1] < xq)
            ++k;
        const double d = w * (q - v[k]);
        data[q * stride] = f[v[k]] + d * d;
    }
}

} // namespace

Geometry::Geometry(int width, int height, int depth, double sx, double sy, double sz)
    : Geometry(Index3(width, height, depth), Spacing3(sx, sy, sz))
{
}

Geometry::Geometry(const Index3& dims, const Spacing3& spacing) : dims_(dims), spacing_(spacing)
{
    validate(dims_, spacing_);
}

Index3 Geometry::coord(std::size_t index) const
{
    const auto w = static_cast<std::size_t>(dims_.x());
    const auto h = static_cast<std::size_t>(dims_.y());
    return Index3(static_cast<int>(index % w), static_cast<int>((index / w) % h),
                  static_cast<int>(index / (w * h)));
}

bool Geometry::matches(const Geometry& other, double rel_tol) const
{
    if ((dims_ != other.dims_).any())
        return false;
    for (int a = 0; a < 3; ++a) {
        const double s = std::max(std::abs(spacing_[a]), std::abs(other.spacing_[a]));
        if (std::abs(spacing_[a] - other.spacing_[a]) > rel_tol * s)
            return false;
    }
    return true;
}

std::string Geometry::describe() const
{
    std::ostringstream os;
    os << "dims (" << dims_.x() << ", " << dims_.y() << ", " << dims_.z() << ") spacing ("
       << spacing_.x() << ", " << spacing_.y() << ", " << spacing_.z() << ") mm";
    return os.str();
}

VoxelMask::VoxelMask(Geometry geometry)
    : geometry_(std::move(geometry)), labels_(geometry_.voxel_count(), 0)
{
}

VoxelMask::VoxelMask(Geometry geometry, std::vector<Label> labels)
    : geometry_(std::move(geometry)), labels_(std::move(labels))
{
    if (labels_.size() != geometry_.voxel_count())
        throw ShapeError("label grid has " + std::to_string(labels_.size()) +
                         " voxels, geometry " + geometry_.describe() + " needs " +
                         std::to_string(geometry_.voxel_count()));
}

bool VoxelMask::is_binary() const
{
    return std::all_of(labels_.begin(), labels_.end(), [](Label l) { return l <= 1; });
}

std::size_t VoxelMask::count_positive() const
{
    return static_cast<std::size_t>(
        std::count_if(labels_.begin(), labels_.end(), [](Label l) { return l != 0; }));
}

void require_same_geometry(const Geometry& a, const Geometry& b, const char* what)
{
    if (!a.matches(b))
        throw ShapeError(std::string("geometry mismatch between ") + what + ": " + a.describe() +
                         " vs " + b.describe());
}

VoxelMask binarize(const VoxelMask& mask, const std::set<int>& class_set)
{
    if (class_set.empty())
        throw std::invalid_argument("binarize: class set must not be empty");
    std::array<bool, 256> selected{};
    for (int id : class_set)
        if (id >= 0 && id < 256)
            selected[static_cast<std::size_t>(id)] = true;

    std::vector<VoxelMask::Label> out(mask.size());
    std::transform(mask.labels().begin(), mask.labels().end(), out.begin(),
                   [&](VoxelMask::Label l) { return VoxelMask::Label(selected[l] ? 1 : 0); });
    return VoxelMask(mask.geometry(), std::move(out));
}

VoxelMask binarize_nonzero(const VoxelMask& mask)
{
    std::vector<VoxelMask::Label> out(mask.size());
    std::transform(mask.labels().begin(), mask.labels().end(), out.begin(),
                   [](VoxelMask::Label l) { return VoxelMask::Label(l != 0 ? 1 : 0); });
    return VoxelMask(mask.geometry(), std::move(out));
}

ConfusionCounts confusion(const VoxelMask& ref, const VoxelMask& pred)
{
    require_same_geometry(ref.geometry(), pred.geometry(), "reference and prediction");
    ConfusionCounts c;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const bool r = ref[i] != 0;
        const bool p = pred[i] != 0;
        if (r && p)
            ++c.tp;
        else if (p)
            ++c.fp;
        else if (r)
            ++c.fn;
        else
            ++c.tn;
    }
    return c;
}

ConfusionCounts confusion(const VoxelMask& ref, const VoxelMask& pred, const VoxelMask& region)
{
    require_same_geometry(ref.geometry(), pred.geometry(), "reference and prediction");
    require_same_geometry(ref.geometry(), region.geometry(), "reference and region");
    ConfusionCounts c;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        if (region[i] == 0)
            continue;
        const bool r = ref[i] != 0;
        const bool p = pred[i] != 0;
        if (r && p)
            ++c.tp;
        else if (p)
            ++c.fp;
        else if (r)
            ++c.fn;
        else
            ++c.tn;
    }
    return c;
}

double volume_ml(const VoxelMask& mask)
{
    return static_cast<double>(mask.count_positive()) * mask.geometry().voxel_volume_ml();
}

SurfaceSet extract_surface(const VoxelMask& mask)
{
    const Geometry& g = mask.geometry();
    const int w = g.width(), h = g.height(), d = g.depth();
    SurfaceSet out{g, {}};

    auto negative = [&](int x, int y, int z) {
        if (x < 0 || y < 0 || z < 0 || x >= w || y >= h || z >= d)
            return true;
        return mask.at(x, y, z) == 0;
    };

    for (int z = 0; z < d; ++z)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (mask.at(x, y, z) == 0)
                    continue;
                if (negative(x - 1, y, z) || negative(x + 1, y, z) || negative(x, y - 1, z) ||
                    negative(x, y + 1, z) || negative(x, y, z - 1) || negative(x, y, z + 1))
                    out.voxels.push_back(g.index(x, y, z));
            }
    return out;
}

DistanceField distance_field(const SurfaceSet& target)
{
    const Geometry& g = target.geometry;
    DistanceField field{g, std::vector<double>(g.voxel_count(), kInf)};
    if (target.empty())
        return field;

    for (std::size_t i : target.voxels)
        field.values[i] = 0.0;

    const std::size_t w = static_cast<std::size_t>(g.width());
    const std::size_t h = static_cast<std::size_t>(g.height());
    const std::size_t d = static_cast<std::size_t>(g.depth());
    const std::size_t longest = std::max({w, h, d});
    std::vector<double> f(longest);
    std::vector<int> v(longest);
    std::vector<double> z(longest + 1);
    double* data = field.values.data();

    for (std::size_t zz = 0; zz < d; ++zz)
        for (std::size_t y = 0; y < h; ++y)
            edt_line(data + w * (y + h * zz), w, 1, g.spacing().x(), f, v, z);
    for (std::size_t zz = 0; zz < d; ++zz)
        for (std::size_t x = 0; x < w; ++x)
            edt_line(data + x + w * h * zz, h, w, g.spacing().y(), f, v, z);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            edt_line(data + x + w * y, d, w * h, g.spacing().z(), f, v, z);

    for (double& value : field.values)
        value = std::sqrt(value);
    return field;
}

VoxelBox bounding_box(const VoxelMask& mask)
{
    VoxelBox box;
    box.lo = mask.geometry().dims();
    box.hi = Index3::Constant(-1);
    const Geometry& g = mask.geometry();
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i] == 0)
            continue;
        const Index3 c = g.coord(i);
        box.lo = box.lo.min(c);
        box.hi = box.hi.max(c);
    }
    return box;
}

VoxelBox merge(const VoxelBox& a, const VoxelBox& b)
{
    if (a.empty())
        return b;
    if (b.empty())
        return a;
    return VoxelBox{a.lo.min(b.lo), a.hi.max(b.hi)};
}

VoxelMask crop(const VoxelMask& mask, const VoxelBox& box)
{
    if (box.empty() || !mask.geometry().contains(box.lo) || !mask.geometry().contains(box.hi))
        throw std::invalid_argument("crop: box outside grid " + mask.geometry().describe());
    const Index3 ext = box.extent();
    VoxelMask out(Geometry(ext, mask.geometry().spacing()));
    for (int z = 0; z < ext.z(); ++z)
        for (int y = 0; y < ext.y(); ++y)
            for (int x = 0; x < ext.x(); ++x)
                out.set(x, y, z, mask.at(box.lo.x() + x, box.lo.y() + y, box.lo.z() + z));
    return out;
}

} // namespace segeval
