// SPDX-License-Identifier: Apache-2.0
//
// Generators, temp directories and brute-force reference implementations
// shared by the unit tests and the acceptance runner.

#ifndef SEGEVAL_TESTS_SUPPORT_HPP
#define SEGEVAL_TESTS_SUPPORT_HPP

#include "segeval/io.hpp"
#include "segeval/mask.hpp"
#include "segeval/stats.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace testsupport {

using segeval::Geometry;
using segeval::VoxelMask;

class TempDir {
public:
    explicit TempDir(const std::string& tag)
    {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("segeval_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

inline double unit(std::mt19937_64& rng)
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline int between(std::mt19937_64& rng, int lo, int hi)
{
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Geometry random_geometry(std::mt19937_64& rng, int max_extent, bool anisotropic = true)
{
    auto spacing = [&] { return anisotropic ? 0.2 + 3.0 * unit(rng) : 1.0; };
    return Geometry(between(rng, 1, max_extent), between(rng, 1, max_extent),
                    between(rng, 1, max_extent), spacing(), spacing(), spacing());
}

/// Bernoulli(density) mask, optionally forced non-empty.
inline VoxelMask random_mask(std::mt19937_64& rng, const Geometry& g, double density,
                             bool nonempty = false)
{
    VoxelMask m(g);
    for (std::size_t i = 0; i < m.size(); ++i)
        m.set(i, unit(rng) < density ? 1 : 0);
    if (nonempty && m.empty())
        m.set(static_cast<std::size_t>(between(rng, 0, static_cast<int>(m.size()) - 1)), 1);
    return m;
}

/// Blob-like mask: voxels within a random ellipsoid, with a little noise.
inline VoxelMask random_blob(std::mt19937_64& rng, const Geometry& g, double noise = 0.05)
{
    VoxelMask m(g);
    const double cx = unit(rng) * g.width(), cy = unit(rng) * g.height(), cz = unit(rng) * g.depth();
    const double rx = 0.5 + unit(rng) * g.width() / 2.0, ry = 0.5 + unit(rng) * g.height() / 2.0,
                 rz = 0.5 + unit(rng) * g.depth() / 2.0;
    for (int z = 0; z < g.depth(); ++z)
        for (int y = 0; y < g.height(); ++y)
            for (int x = 0; x < g.width(); ++x) {
                const double e = std::pow((x - cx) / rx, 2) + std::pow((y - cy) / ry, 2) +
                                 std::pow((z - cz) / rz, 2);
                bool on = e <= 1.0;
                if (unit(rng) < noise)
                    on = !on;
                m.set(x, y, z, on ? 1 : 0);
            }
    return m;
}

// ---- brute-force reference implementations ----

struct Voxel {
    int x, y, z;
};

inline bool positive_at(const VoxelMask& m, int x, int y, int z)
{
    const auto& g = m.geometry();
    if (x < 0 || y < 0 || z < 0 || x >= g.width() || y >= g.height() || z >= g.depth())
        return false;
    return m.at(x, y, z) != 0;
}

inline std::vector<Voxel> brute_surface(const VoxelMask& m)
{
    std::vector<Voxel> out;
    const auto& g = m.geometry();
    for (int z = 0; z < g.depth(); ++z)
        for (int y = 0; y < g.height(); ++y)
            for (int x = 0; x < g.width(); ++x) {
                if (!positive_at(m, x, y, z))
                    continue;
                const bool inner = positive_at(m, x - 1, y, z) && positive_at(m, x + 1, y, z) &&
                                   positive_at(m, x, y - 1, z) && positive_at(m, x, y + 1, z) &&
                                   positive_at(m, x, y, z - 1) && positive_at(m, x, y, z + 1);
                if (!inner)
                    out.push_back({x, y, z});
            }
    return out;
}

inline double brute_distance(const Geometry& g, const Voxel& a, const std::vector<Voxel>& targets)
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : targets) {
        const double dx = (a.x - b.x) * g.spacing().x();
        const double dy = (a.y - b.y) * g.spacing().y();
        const double dz = (a.z - b.z) * g.spacing().z();
        best = std::min(best, std::sqrt(dx * dx + dy * dy + dz * dz));
    }
    return best;
}

inline std::vector<double> brute_directed(const Geometry& g, const std::vector<Voxel>& from,
                                          const std::vector<Voxel>& to)
{
    std::vector<double> d;
    for (const auto& a : from)
        d.push_back(brute_distance(g, a, to));
    return d;
}

inline double brute_percentile(std::vector<double> v, double q)
{
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct BruteDistances {
    std::vector<double> ab, ba;
};

inline BruteDistances brute_pair(const VoxelMask& a, const VoxelMask& b)
{
    const auto sa = brute_surface(a), sb = brute_surface(b);
    return {brute_directed(a.geometry(), sa, sb), brute_directed(a.geometry(), sb, sa)};
}

inline double brute_hd95(const BruteDistances& d)
{
    return std::max(brute_percentile(d.ab, 0.95), brute_percentile(d.ba, 0.95));
}

inline double brute_assd(const BruteDistances& d)
{
    double s = 0.0;
    for (double v : d.ab)
        s += v;
    for (double v : d.ba)
        s += v;
    return s / static_cast<double>(d.ab.size() + d.ba.size());
}

inline double brute_sdt(const BruteDistances& d, double t)
{
    std::size_t within = 0;
    for (double v : d.ab)
        within += v <= t;
    for (double v : d.ba)
        within += v <= t;
    return static_cast<double>(within) / static_cast<double>(d.ab.size() + d.ba.size());
}

/// Inner boundary band: mask voxels within `band` of the mask's own surface.
inline std::vector<bool> brute_band(const VoxelMask& m, double band)
{
    const auto surface = brute_surface(m);
    const auto& g = m.geometry();
    std::vector<bool> in(m.size(), false);
    for (int z = 0; z < g.depth(); ++z)
        for (int y = 0; y < g.height(); ++y)
            for (int x = 0; x < g.width(); ++x)
                if (m.at(x, y, z) != 0 && brute_distance(g, {x, y, z}, surface) <= band)
                    in[g.index(x, y, z)] = true;
    return in;
}

inline double brute_biou(const VoxelMask& a, const VoxelMask& b, double band)
{
    const auto ba = brute_band(a, band), bb = brute_band(b, band);
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < ba.size(); ++i) {
        inter += ba[i] && bb[i];
        uni += ba[i] || bb[i];
    }
    return static_cast<double>(inter) / static_cast<double>(uni);
}

/// E_D by walking all 2^n predictions with their Bernoulli(p) weights.
/// Reference occupies the first k voxels.
inline double brute_expected_dice(int n, int k, double p)
{
    double total = 0.0;
    for (std::uint32_t pred = 0; pred < (1u << n); ++pred) {
        int tp = 0, fp = 0, pos = 0;
        for (int i = 0; i < n; ++i) {
            const bool on = (pred >> i) & 1u;
            pos += on;
            if (on && i < k)
                ++tp;
            else if (on)
                ++fp;
        }
        const double w = std::pow(p, pos) * std::pow(1.0 - p, n - pos);
        total += w * 2.0 * tp / static_cast<double>(2 * tp + fp + (k - tp));
    }
    return total;
}

/// Pearson correlation of mid-ranks, ranks built by direct counting.
inline double brute_spearman(const std::vector<double>& x, const std::vector<double>& y)
{
    auto ranks = [](const std::vector<double>& v) {
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            double less = 0, equal = 0;
            for (double w : v) {
                less += w < v[i];
                equal += w == v[i];
            }
            r[i] = less + (equal + 1.0) / 2.0;
        }
        return r;
    };
    const auto rx = ranks(x), ry = ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i] / n;
        my += ry[i] / n;
    }
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

// ---- NIfTI-1 golden files assembled field by field ----

inline void put_bytes(std::vector<std::uint8_t>& buf, std::size_t offset, const void* src,
                      std::size_t size, bool big_endian)
{
    const auto* s = static_cast<const std::uint8_t*>(src);
    for (std::size_t i = 0; i < size; ++i)
        buf[offset + i] = big_endian ? s[size - 1 - i] : s[i];
}

template <typename T>
void put(std::vector<std::uint8_t>& buf, std::size_t offset, T value, bool big_endian = false)
{
    put_bytes(buf, offset, &value, sizeof(T), big_endian);
}

struct GoldenNifti {
    std::int16_t dims[3] = {2, 2, 2};
    float pixdim[3] = {1.0f, 1.0f, 1.0f};
    std::int16_t datatype = 2;
    std::string magic = "n+1";
    bool big_endian = false;
    float scl_slope = 0.0f;
    float scl_inter = 0.0f;
};

/// 348-byte header, 4-byte extension flag, then data at offset 352.
template <typename T>
std::vector<std::uint8_t> golden_nifti(const GoldenNifti& spec, const std::vector<T>& values)
{
    const bool be = spec.big_endian;
    std::vector<std::uint8_t> buf(352 + values.size() * sizeof(T), 0);
    put<std::int32_t>(buf, 0, 348, be);
    put<std::int16_t>(buf, 40, 3, be);
    for (int i = 0; i < 3; ++i)
        put<std::int16_t>(buf, 42 + 2 * i, spec.dims[i], be);
    for (int i = 3; i < 7; ++i)
        put<std::int16_t>(buf, 42 + 2 * i, 1, be);
    put<std::int16_t>(buf, 70, spec.datatype, be);
    put<std::int16_t>(buf, 72, static_cast<std::int16_t>(8 * sizeof(T)), be);
    put<float>(buf, 76, 1.0f, be);
    for (int i = 0; i < 3; ++i)
        put<float>(buf, 80 + 4 * i, spec.pixdim[i], be);
    put<float>(buf, 108, 352.0f, be);
    put<float>(buf, 112, spec.scl_slope, be);
    put<float>(buf, 116, spec.scl_inter, be);
    for (std::size_t i = 0; i < spec.magic.size() && i < 4; ++i)
        buf[344 + i] = static_cast<std::uint8_t>(spec.magic[i]);
    for (std::size_t i = 0; i < values.size(); ++i)
        put<T>(buf, 352 + i * sizeof(T), values[i], be);
    return buf;
}

inline void write_file(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes)
{
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline std::vector<std::string> csv_lines(const std::string& text)
{
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        lines.push_back(line);
    return lines;
}

inline std::vector<std::string> csv_split(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ','))
        cells.push_back(cell);
    if (!line.empty() && line.back() == ',')
        cells.emplace_back();
    return cells;
}

} // namespace testsupport

#endif // SEGEVAL_TESTS_SUPPORT_HPP
