// SPDX-License-Identifier: Apache-2.0
//
// Aggregate statistics: quantiles, percentile bootstrap confidence intervals
// and Spearman rank correlation with significance masking.

#ifndef SEGEVAL_STATS_HPP
#define SEGEVAL_STATS_HPP

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace segeval {

/// Seeded generator used everywhere randomness enters a report.
using Rng = std::mt19937_64;

/// Uniform integer in [0, bound), identical on every platform for a given
/// engine state (std::uniform_int_distribution is implementation-defined).
std::uint64_t uniform_index(Rng& rng, std::uint64_t bound);
/// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform_unit(Rng& rng);
/// Derives an independent stream seed for batch `index` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Linear interpolation between closest ranks at position q*(n-1) of the
/// ascending sort. Throws on empty input or q outside [0,1].
double percentile(std::vector<double> values, double q);
double median(std::span<const double> values);
double mean(std::span<const double> values);

enum class Statistic { Median, Mean };

struct BootstrapSpec {
    int repetitions = 1000;
    double confidence = 0.95;
    std::uint64_t seed = 42;

    void validate() const;
};

struct ConfidenceInterval {
    double point = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

/// Percentile bootstrap of `statistic`; deterministic for a fixed seed.
ConfidenceInterval bootstrap_ci(std::span<const double> values, Statistic statistic,
                                const BootstrapSpec& spec);

/// Percentile bootstrap of an arbitrary statistic over `n` resampled items.
/// The statistic receives resampled item indices and may be undefined for a
/// resample; such resamples are skipped. Returns nullopt when the statistic
/// is undefined on the full sample or on every resample.
std::optional<ConfidenceInterval> bootstrap_ci(
    std::size_t n, const std::function<std::optional<double>(std::span<const std::size_t>)>& statistic,
    const BootstrapSpec& spec);

/// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> midranks(std::span<const double> values);

struct SpearmanResult {
    std::optional<double> rho;     ///< undefined for constant input or n < 3
    std::optional<double> p_value; ///< two-sided, Student-t approximation
    std::size_t n = 0;             ///< pairs used after pairwise deletion
};

SpearmanResult spearman(std::span<const double> x, std::span<const double> y);
/// Pairwise deletion: pairs where either side is undefined are dropped.
SpearmanResult spearman(std::span<const std::optional<double>> x,
                        std::span<const std::optional<double>> y);

struct NamedColumn {
    std::string name;
    std::vector<std::optional<double>> values;
};

struct CorrelationMatrix {
    std::vector<std::string> names;
    Eigen::MatrixXd rho;                                   ///< NaN where undefined
    Eigen::MatrixXd p_value;                               ///< NaN where undefined
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> defined;
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> insignificant; ///< p > alpha
    Eigen::Array<std::size_t, Eigen::Dynamic, Eigen::Dynamic> n;
    double alpha = 0.05;
};

CorrelationMatrix correlation_matrix(const std::vector<NamedColumn>& columns, double alpha = 0.05);

} // namespace segeval

#endif // SEGEVAL_STATS_HPP
