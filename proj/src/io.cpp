// SPDX-License-Identifier: Apache-2.0

#include "segeval/io.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace segeval {

namespace fs = std::filesystem;

FormatError::FormatError(const fs::path& file, std::string field, const std::string& detail)
    : std::runtime_error(file.string() + ": " + field + ": " + detail), file_(file),
      field_(std::move(field))
{
}

namespace {

constexpr std::size_t kNiftiHeaderSize = 348;
constexpr std::size_t kNiftiDataOffset = 352;

std::vector<std::uint8_t> read_bytes(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError(path, "file", "cannot open for reading");
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_bytes(const fs::path& path, const void* data, std::size_t size)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error(path.string() + ": cannot open for writing");
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out)
        throw std::runtime_error(path.string() + ": write failed");
}

bool is_gzip(const std::vector<std::uint8_t>& bytes)
{
    return bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b;
}

// Little/big-endian field reader over the raw header.
class HeaderReader {
public:
    HeaderReader(const std::vector<std::uint8_t>& bytes, bool swap) : bytes_(bytes), swap_(swap) {}

    template <typename T>
    T get(std::size_t offset) const
    {
        std::array<std::uint8_t, sizeof(T)> raw;
        std::memcpy(raw.data(), bytes_.data() + offset, sizeof(T));
        if (swap_)
            std::reverse(raw.begin(), raw.end());
        T value;
        std::memcpy(&value, raw.data(), sizeof(T));
        return value;
    }

private:
    const std::vector<std::uint8_t>& bytes_;
    bool swap_;
};

std::size_t type_size(std::int16_t code)
{
    switch (static_cast<NiftiType>(code)) {
    case NiftiType::UInt8:
    case NiftiType::Int8:
        return 1;
    case NiftiType::Int16:
    case NiftiType::UInt16:
        return 2;
    case NiftiType::Int32:
    case NiftiType::Float32:
        return 4;
    case NiftiType::Float64:
        return 8;
    }
    return 0;
}

double voxel_value(const HeaderReader& r, std::int16_t code, std::size_t offset)
{
    switch (static_cast<NiftiType>(code)) {
    case NiftiType::UInt8:
        return r.get<std::uint8_t>(offset);
    case NiftiType::Int8:
        return r.get<std::int8_t>(offset);
    case NiftiType::Int16:
        return r.get<std::int16_t>(offset);
    case NiftiType::UInt16:
        return r.get<std::uint16_t>(offset);
    case NiftiType::Int32:
        return r.get<std::int32_t>(offset);
    case NiftiType::Float32:
        return r.get<float>(offset);
    case NiftiType::Float64:
        return r.get<double>(offset);
    }
    return 0.0;
}

VoxelMask::Label to_label(double value, const fs::path& origin, std::size_t voxel)
{
    const double rounded = std::round(value);
    if (!std::isfinite(value) || std::abs(value - rounded) > 1e-3)
        throw FormatError(origin, "labels",
                          "non-integer label " + std::to_string(value) + " at voxel " +
                              std::to_string(voxel));
    if (rounded < 0.0 || rounded > 255.0)
        throw FormatError(origin, "labels",
                          "label " + std::to_string(value) + " at voxel " + std::to_string(voxel) +
                              " outside [0, 255]");
    return static_cast<VoxelMask::Label>(rounded);
}

std::string shortest(double v)
{
    std::array<char, 64> buf;
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

template <typename T>
void put(std::vector<std::uint8_t>& out, std::size_t offset, T value)
{
    std::memcpy(out.data() + offset, &value, sizeof(T));
}

} // namespace

std::vector<std::uint8_t> gzip_decompress(const std::vector<std::uint8_t>& data, const fs::path& origin)
{
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 32) != Z_OK)
        throw FormatError(origin, "gzip", "inflateInit2 failed");
    zs.next_in = const_cast<Bytef*>(data.data());
    zs.avail_in = static_cast<uInt>(data.size());

    std::vector<std::uint8_t> out;
    std::array<std::uint8_t, 1 << 16> chunk;
    int status = Z_OK;
    while (status != Z_STREAM_END) {
        zs.next_out = chunk.data();
        zs.avail_out = static_cast<uInt>(chunk.size());
        status = inflate(&zs, Z_NO_FLUSH);
        if (status != Z_OK && status != Z_STREAM_END) {
            inflateEnd(&zs);
            throw FormatError(origin, "gzip",
                              std::string("corrupt stream: ") + (zs.msg ? zs.msg : "inflate error"));
        }
        out.insert(out.end(), chunk.data(), chunk.data() + (chunk.size() - zs.avail_out));
        if (status == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
            inflateEnd(&zs);
            throw FormatError(origin, "gzip", "truncated stream");
        }
    }
    inflateEnd(&zs);
    return out;
}

std::vector<std::uint8_t> gzip_compress(const std::vector<std::uint8_t>& data)
{
    z_stream zs{};
    if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw std::runtime_error("deflateInit2 failed");
    zs.next_in = const_cast<Bytef*>(data.data());
    zs.avail_in = static_cast<uInt>(data.size());
    std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(data.size())));
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int status = deflate(&zs, Z_FINISH);
    deflateEnd(&zs);
    if (status != Z_STREAM_END)
        throw std::runtime_error("gzip compression failed");
    out.resize(zs.total_out);
    return out;
}

VoxelMask parse_nifti(const std::vector<std::uint8_t>& bytes, const fs::path& origin)
{
    if (bytes.size() < kNiftiHeaderSize)
        throw FormatError(origin, "header",
                          "file is " + std::to_string(bytes.size()) + " bytes, NIfTI-1 header needs 348");

    const std::string magic(reinterpret_cast<const char*>(bytes.data()) + 344, 3);
    if (magic == "ni1")
        throw FormatError(origin, "magic",
                          "header/data pair (\"ni1\") is not supported, expected single-file \"n+1\"");
    if (magic != "n+1" || bytes[347] != 0)
        throw FormatError(origin, "magic", "expected \"n+1\", not a NIfTI-1 single file");

    std::int32_t sizeof_hdr;
    std::memcpy(&sizeof_hdr, bytes.data(), 4);
    bool swap = false;
    if (sizeof_hdr != 348) {
        if (static_cast<std::int32_t>(__builtin_bswap32(static_cast<std::uint32_t>(sizeof_hdr))) != 348)
            throw FormatError(origin, "sizeof_hdr",
                              "expected 348, got " + std::to_string(sizeof_hdr));
        swap = true;
    }
    const HeaderReader r(bytes, swap);

    std::array<std::int16_t, 8> dim;
    for (std::size_t i = 0; i < 8; ++i)
        dim[i] = r.get<std::int16_t>(40 + 2 * i);
    if (dim[0] < 3 || dim[0] > 7)
        throw FormatError(origin, "dim[0]",
                          "unsupported dimensionality " + std::to_string(dim[0]) + ", need 3..7");
    for (int i = 1; i <= 3; ++i)
        if (dim[i] < 1)
            throw FormatError(origin, "dim[" + std::to_string(i) + "]",
                              "extent must be >= 1, got " + std::to_string(dim[i]));
    for (int i = 4; i <= dim[0]; ++i)
        if (dim[i] != 1)
            throw FormatError(origin, "dim[" + std::to_string(i) + "]",
                              "only singleton trailing dimensions are supported, got " +
                                  std::to_string(dim[i]));

    const std::int16_t datatype = r.get<std::int16_t>(70);
    const std::size_t bytes_per_voxel = type_size(datatype);
    if (bytes_per_voxel == 0)
        throw FormatError(origin, "datatype", "unsupported datatype code " + std::to_string(datatype));

    Spacing3 spacing;
    for (int i = 0; i < 3; ++i)
        spacing[i] = static_cast<double>(r.get<float>(80 + 4 * static_cast<std::size_t>(i)));
    if (!(spacing > 0.0).all() || !spacing.isFinite().all())
        throw FormatError(origin, "pixdim", "voxel spacing must be finite and > 0");

    const float vox_offset = r.get<float>(108);
    if (!(vox_offset >= static_cast<float>(kNiftiHeaderSize)))
        throw FormatError(origin, "vox_offset", "must be >= 348, got " + shortest(vox_offset));
    const auto data_offset = static_cast<std::size_t>(vox_offset);

    double slope = r.get<float>(112);
    double inter = r.get<float>(116);
    if (slope == 0.0 || !std::isfinite(slope)) {
        slope = 1.0;
        inter = 0.0;
    }

    const Geometry geometry(Index3(dim[1], dim[2], dim[3]), spacing);
    const std::size_t count = geometry.voxel_count();
    if (bytes.size() < data_offset + count * bytes_per_voxel)
        throw FormatError(origin, "data",
                          "truncated: need " + std::to_string(count * bytes_per_voxel) +
                              " voxel bytes at offset " + std::to_string(data_offset));

    std::vector<VoxelMask::Label> labels(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double raw = voxel_value(r, datatype, data_offset + i * bytes_per_voxel);
        labels[i] = to_label(raw * slope + inter, origin, i);
    }
    return VoxelMask(geometry, std::move(labels));
}

VoxelMask parse_rawmask(const std::string& text, const fs::path& origin)
{
    std::istringstream in(text);
    std::string tag;
    int w = 0, h = 0, d = 0;
    double sx = 0, sy = 0, sz = 0;
    if (!(in >> tag) || tag != "RAWMASK")
        throw FormatError(origin, "magic", "expected RAWMASK header");
    if (!(in >> w >> h >> d >> sx >> sy >> sz))
        throw FormatError(origin, "header", "expected 'RAWMASK w h d sx sy sz'");

    std::optional<Geometry> geometry;
    try {
        geometry.emplace(w, h, d, sx, sy, sz);
    } catch (const std::invalid_argument& e) {
        throw FormatError(origin, "header", e.what());
    }

    std::vector<VoxelMask::Label> labels;
    labels.reserve(geometry->voxel_count());
    std::string token;
    while (in >> token) {
        long long value = 0;
        auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc() || end != token.data() + token.size())
            throw FormatError(origin, "labels",
                              "non-integer label '" + token + "' at voxel " + std::to_string(labels.size()));
        if (value < 0 || value > 255)
            throw FormatError(origin, "labels",
                              "label " + token + " at voxel " + std::to_string(labels.size()) +
                                  " outside [0, 255]");
        labels.push_back(static_cast<VoxelMask::Label>(value));
    }
    if (labels.size() != geometry->voxel_count())
        throw FormatError(origin, "labels",
                          "expected " + std::to_string(geometry->voxel_count()) + " labels, found " +
                              std::to_string(labels.size()));
    return VoxelMask(*geometry, std::move(labels));
}

VoxelMask read_mask(const fs::path& path)
{
    std::vector<std::uint8_t> bytes = read_bytes(path);
    if (is_gzip(bytes))
        bytes = gzip_decompress(bytes, path);
    static constexpr std::string_view kRawTag = "RAWMASK";
    if (bytes.size() >= kRawTag.size() &&
        std::equal(kRawTag.begin(), kRawTag.end(), bytes.begin()))
        return parse_rawmask(std::string(bytes.begin(), bytes.end()), path);
    return parse_nifti(bytes, path);
}

std::string format_rawmask(const VoxelMask& mask)
{
    const Geometry& g = mask.geometry();
    std::string out = "RAWMASK " + std::to_string(g.width()) + " " + std::to_string(g.height()) + " " +
                      std::to_string(g.depth()) + " " + shortest(g.spacing().x()) + " " +
                      shortest(g.spacing().y()) + " " + shortest(g.spacing().z()) + "\n";
    for (std::size_t i = 0; i < mask.size(); ++i) {
        out += std::to_string(mask[i]);
        out += (i + 1) % static_cast<std::size_t>(g.width()) == 0 ? '\n' : ' ';
    }
    return out;
}

void write_rawmask(const VoxelMask& mask, const fs::path& path)
{
    const std::string text = format_rawmask(mask);
    write_bytes(path, text.data(), text.size());
}

void write_nifti(const VoxelMask& mask, const fs::path& path, bool gzip, NiftiType type)
{
    const Geometry& g = mask.geometry();
    const auto code = static_cast<std::int16_t>(type);
    const std::size_t bpv = type_size(code);
    std::vector<std::uint8_t> out(kNiftiDataOffset + mask.size() * bpv, 0);

    put<std::int32_t>(out, 0, 348);
    const std::array<std::int16_t, 8> dim{3, static_cast<std::int16_t>(g.width()),
                                          static_cast<std::int16_t>(g.height()),
                                          static_cast<std::int16_t>(g.depth()), 1, 1, 1, 1};
    for (std::size_t i = 0; i < 8; ++i)
        put<std::int16_t>(out, 40 + 2 * i, dim[i]);
    put<std::int16_t>(out, 70, code);
    put<std::int16_t>(out, 72, static_cast<std::int16_t>(8 * bpv));
    put<float>(out, 76, 1.0f);
    for (std::size_t i = 0; i < 3; ++i)
        put<float>(out, 80 + 4 * i, static_cast<float>(g.spacing()[static_cast<Eigen::Index>(i)]));
    put<float>(out, 108, static_cast<float>(kNiftiDataOffset));
    put<float>(out, 112, 1.0f);
    out[123] = 2; // xyzt_units: mm
    std::memcpy(out.data() + 344, "n+1", 4);

    for (std::size_t i = 0; i < mask.size(); ++i) {
        const std::size_t at = kNiftiDataOffset + i * bpv;
        const auto v = mask[i];
        switch (type) {
        case NiftiType::UInt8: put<std::uint8_t>(out, at, v); break;
        case NiftiType::Int8: put<std::int8_t>(out, at, static_cast<std::int8_t>(v)); break;
        case NiftiType::Int16: put<std::int16_t>(out, at, v); break;
        case NiftiType::UInt16: put<std::uint16_t>(out, at, v); break;
        case NiftiType::Int32: put<std::int32_t>(out, at, v); break;
        case NiftiType::Float32: put<float>(out, at, v); break;
        case NiftiType::Float64: put<double>(out, at, v); break;
        }
    }
    if (gzip)
        out = gzip_compress(out);
    write_bytes(path, out.data(), out.size());
}

std::optional<std::string> case_stem(const fs::path& file)
{
    const std::string name = file.filename().string();
    for (std::string_view ext : {".nii.gz", ".nii", ".rawmask"}) {
        if (name.size() > ext.size() && name.ends_with(ext))
            return name.substr(0, name.size() - ext.size());
    }
    return std::nullopt;
}

namespace {

std::map<std::string, fs::path> list_cases(const fs::path& dir, const char* role)
{
    if (!fs::is_directory(dir))
        throw BindError(std::string(role) + " directory does not exist: " + dir.string());
    std::map<std::string, fs::path> out;
    std::vector<std::string> duplicates;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().filename().string().starts_with("."))
            continue;
        const auto stem = case_stem(entry.path());
        if (!stem)
            continue;
        auto [it, inserted] = out.emplace(*stem, entry.path());
        if (!inserted)
            duplicates.push_back(*stem);
    }
    if (!duplicates.empty()) {
        std::sort(duplicates.begin(), duplicates.end());
        std::string msg = std::string("duplicate case stems in ") + role + " directory " + dir.string() + ":";
        for (const auto& d : duplicates)
            msg += " " + d;
        throw BindError(msg);
    }
    return out;
}

} // namespace

BindResult bind_cases(const fs::path& ref_dir, const fs::path& pred_dir,
                      const std::vector<fs::path>& expert_dirs, const std::optional<fs::path>& region_dir)
{
    const auto refs = list_cases(ref_dir, "reference");
    const auto preds = list_cases(pred_dir, "prediction");
    std::vector<std::map<std::string, fs::path>> experts;
    for (const auto& d : expert_dirs)
        experts.push_back(list_cases(d, "expert"));
    std::optional<std::map<std::string, fs::path>> regions;
    if (region_dir)
        regions = list_cases(*region_dir, "region");

    BindResult result;
    std::vector<std::string> missing;
    for (const auto& [stem, ref_path] : refs) {
        CaseBinding b{stem, ref_path, {}, {}, std::nullopt};
        if (auto it = preds.find(stem); it != preds.end())
            b.pred_path = it->second;
        else
            missing.push_back(stem + " (prediction)");
        for (std::size_t e = 0; e < experts.size(); ++e) {
            if (auto it = experts[e].find(stem); it != experts[e].end())
                b.expert_paths.push_back(it->second);
            else
                missing.push_back(stem + " (expert " + expert_dirs[e].string() + ")");
        }
        if (regions) {
            if (auto it = regions->find(stem); it != regions->end())
                b.region_path = it->second;
            else
                missing.push_back(stem + " (region)");
        }
        result.cases.push_back(std::move(b));
    }
    if (!missing.empty()) {
        std::string msg = "unmatched reference cases:";
        for (const auto& m : missing)
            msg += " " + m;
        throw BindError(msg);
    }
    for (const auto& [stem, path] : preds)
        if (!refs.contains(stem))
            result.warnings.push_back("prediction without reference ignored: " + path.filename().string());
    return result;
}

} // namespace segeval
