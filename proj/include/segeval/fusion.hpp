// SPDX-License-Identifier: Apache-2.0
//
// Multi-expert annotations: majority-vote fusion, the U-score (mean binary
// annotation entropy over voxels any expert marked positive) and pairwise
// agreement tables.

#ifndef SEGEVAL_FUSION_HPP
#define SEGEVAL_FUSION_HPP

#include "segeval/mask.hpp"
#include "segeval/metrics.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace segeval {

/// Two or more binary expert masks on one geometry.
class ExpertSet {
public:
    explicit ExpertSet(std::vector<VoxelMask> experts);

    std::size_t size() const { return experts_.size(); }
    const VoxelMask& operator[](std::size_t i) const { return experts_[i]; }
    const std::vector<VoxelMask>& experts() const { return experts_; }
    const Geometry& geometry() const { return experts_.front().geometry(); }

private:
    std::vector<VoxelMask> experts_;
};

/// Per voxel, the number of experts marking it positive.
std::vector<std::uint16_t> vote_count(const ExpertSet& experts);

/// Strict majority: positive iff more than half of the experts agree. Ties are negative.
VoxelMask majority_vote(const ExpertSet& experts);

/// Binary entropy (bits) of a voxel with `positive` of `total` votes.
double annotation_entropy(std::size_t positive, std::size_t total);

/// Mean annotation entropy over the union of expert-positive voxels, in [0,1].
/// nullopt when no expert marks any voxel.
std::optional<double> u_score(const ExpertSet& experts);

struct DatasetUScore {
    std::optional<double> mean;
    std::optional<double> median;
    std::size_t defined_cases = 0;
};

/// Aggregate over cases, ignoring cases with an undefined U-score.
DatasetUScore dataset_u_score(std::span<const std::optional<double>> per_case);

struct PairAgreement {
    std::size_t ref_expert = 0;          ///< expert index used as reference (unused for majority)
    std::size_t pred_expert = 0;         ///< expert index used as prediction
    bool ref_is_majority = false;
    SegmentationMetrics metrics;
};

struct AgreementTables {
    std::vector<PairAgreement> inter_expert;    ///< every unordered pair (i < j), i as reference
    std::vector<PairAgreement> majority_expert; ///< majority vote vs each expert
};

AgreementTables agreement_tables(const ExpertSet& experts, const ToleranceSpec& tolerances);

} // namespace segeval

#endif // SEGEVAL_FUSION_HPP
