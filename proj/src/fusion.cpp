// SPDX-License-Identifier: Apache-2.0

#include "segeval/fusion.hpp"

#include "segeval/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace segeval {

ExpertSet::ExpertSet(std::vector<VoxelMask> experts) : experts_(std::move(experts))
{
    if (experts_.size() < 2)
        throw std::invalid_argument("an expert set needs at least two experts, got " +
                                    std::to_string(experts_.size()));
    for (std::size_t e = 1; e < experts_.size(); ++e)
        require_same_geometry(experts_[0].geometry(), experts_[e].geometry(), "experts");
}

std::vector<std::uint16_t> vote_count(const ExpertSet& experts)
{
    std::vector<std::uint16_t> votes(experts[0].size(), 0);
    for (const auto& mask : experts.experts())
        for (std::size_t i = 0; i < votes.size(); ++i)
            votes[i] = static_cast<std::uint16_t>(votes[i] + (mask[i] != 0 ? 1 : 0));
    return votes;
}

VoxelMask majority_vote(const ExpertSet& experts)
{
    const auto votes = vote_count(experts);
    const std::size_t n = experts.size();
    VoxelMask out(experts.geometry());
    for (std::size_t i = 0; i < votes.size(); ++i)
        out.set(i, 2 * static_cast<std::size_t>(votes[i]) > n ? 1 : 0);
    return out;
}

double annotation_entropy(std::size_t positive, std::size_t total)
{
    if (total == 0 || positive > total)
        throw std::invalid_argument("annotation_entropy: need 0 <= positive <= total, total > 0");
    double h = 0.0;
    for (std::size_t count : {positive, total - positive}) {
        if (count == 0)
            continue; // 0 log 0 = 0
        const double f = static_cast<double>(count) / static_cast<double>(total);
        h -= f * std::log2(f);
    }
    return h;
}

std::optional<double> u_score(const ExpertSet& experts)
{
    const auto votes = vote_count(experts);
    const std::size_t n = experts.size();

    // Entropy only depends on the vote count, so tabulate it.
    std::vector<double> entropy(n + 1);
    for (std::size_t k = 0; k <= n; ++k)
        entropy[k] = annotation_entropy(k, n);

    double sum = 0.0;
    std::size_t in_union = 0;
    for (auto v : votes) {
        if (v == 0)
            continue;
        sum += entropy[v];
        ++in_union;
    }
    if (in_union == 0)
        return std::nullopt;
    return sum / static_cast<double>(in_union);
}

DatasetUScore dataset_u_score(std::span<const std::optional<double>> per_case)
{
    std::vector<double> defined;
    for (const auto& u : per_case)
        if (u)
            defined.push_back(*u);
    DatasetUScore out;
    out.defined_cases = defined.size();
    if (defined.empty())
        return out;
    out.mean = mean(defined);
    out.median = median(defined);
    return out;
}

AgreementTables agreement_tables(const ExpertSet& experts, const ToleranceSpec& tolerances)
{
    AgreementTables tables;
    for (std::size_t i = 0; i < experts.size(); ++i)
        for (std::size_t j = i + 1; j < experts.size(); ++j)
            tables.inter_expert.push_back(
                {i, j, false, evaluate_segmentation(experts[i], experts[j], tolerances)});

    const VoxelMask fused = majority_vote(experts);
    for (std::size_t e = 0; e < experts.size(); ++e)
        tables.majority_expert.push_back(
            {0, e, true, evaluate_segmentation(fused, experts[e], tolerances)});
    return tables;
}

} // namespace segeval
