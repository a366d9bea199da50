// SPDX-License-Identifier: Apache-2.0
//
// Mask ingestion (single-file NIfTI-1, optionally gzip-compressed, and the
// RAWMASK text format) and pairing of case files across directories.

#ifndef SEGEVAL_IO_HPP
#define SEGEVAL_IO_HPP

#include "segeval/mask.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace segeval {

/// Unreadable or malformed input file. `field()` names the offending part
/// (e.g. "magic", "datatype", "dim[0]", "labels").
class FormatError : public std::runtime_error {
public:
    FormatError(const std::filesystem::path& file, std::string field, const std::string& detail);

    const std::filesystem::path& file() const { return file_; }
    const std::string& field() const { return field_; }

private:
    std::filesystem::path file_;
    std::string field_;
};

/// NIfTI-1 datatype codes accepted on read.
enum class NiftiType : std::int16_t {
    UInt8 = 2,
    Int16 = 4,
    Int32 = 8,
    Float32 = 16,
    Float64 = 64,
    Int8 = 256,
    UInt16 = 512,
};

/// Reads a NIfTI-1 (".nii", ".nii.gz") or RAWMASK file. Format is sniffed
/// from content: gzip magic, then "RAWMASK" text, otherwise NIfTI-1.
VoxelMask read_mask(const std::filesystem::path& path);

/// Parses an in-memory (already decompressed) NIfTI-1 stream.
VoxelMask parse_nifti(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& origin);
VoxelMask parse_rawmask(const std::string& text, const std::filesystem::path& origin);

/// "RAWMASK w h d sx sy sz" header line, then w*h*d labels, x fastest.
std::string format_rawmask(const VoxelMask& mask);
void write_rawmask(const VoxelMask& mask, const std::filesystem::path& path);

/// Little-endian single-file NIfTI-1; gzip-compressed when `gzip` is set.
void write_nifti(const VoxelMask& mask, const std::filesystem::path& path, bool gzip = false,
                 NiftiType type = NiftiType::UInt8);

std::vector<std::uint8_t> gzip_compress(const std::vector<std::uint8_t>& data);
std::vector<std::uint8_t> gzip_decompress(const std::vector<std::uint8_t>& data,
                                          const std::filesystem::path& origin);

/// File name with ".nii.gz", ".nii" or ".rawmask" removed; nullopt for other files.
std::optional<std::string> case_stem(const std::filesystem::path& file);

struct CaseBinding {
    std::string case_id;
    std::filesystem::path ref_path;
    std::filesystem::path pred_path;
    std::vector<std::filesystem::path> expert_paths;
    std::optional<std::filesystem::path> region_path;
};

class BindError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BindResult {
    std::vector<CaseBinding> cases; ///< sorted by case id
    std::vector<std::string> warnings;
};

/// Matches case files by stem. References without a prediction (or a
/// missing expert/region file), duplicate stems and missing directories
/// raise BindError; surplus predictions only warn.
BindResult bind_cases(const std::filesystem::path& ref_dir, const std::filesystem::path& pred_dir,
                      const std::vector<std::filesystem::path>& expert_dirs = {},
                      const std::optional<std::filesystem::path>& region_dir = std::nullopt);

} // namespace segeval

#endif // SEGEVAL_IO_HPP
