// SPDX-License-Identifier: Apache-2.0
//
// Expected Dice of a random segmenter: every voxel of an n-voxel region is
// predicted positive independently with probability p, against a reference
// holding round(p*n) positives.

#ifndef SEGEVAL_RANDOM_MODEL_HPP
#define SEGEVAL_RANDOM_MODEL_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace segeval {

class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RandomModelSpec {
    std::uint64_t n = 0;
    double p = 0.5;
    std::uint64_t ref_positive = 0;

    /// Reference size round(p*n). Throws if it falls outside [1, n].
    static RandomModelSpec from_p(std::uint64_t n, double p);
    /// Explicit reference size.
    static RandomModelSpec with_reference(std::uint64_t n, double p, std::uint64_t ref_positive);

    void validate() const;
};

enum class ExactMethod {
    Enumeration, ///< all 2^n predictions, n <= 22
    BinomialSum  ///< sum over (TP, FP) with binomial weights, n <= kMaxBinomialN
};

inline constexpr std::uint64_t kMaxEnumerationN = 22;
inline constexpr std::uint64_t kMaxBinomialN = 200000;

double expected_dice_exact(const RandomModelSpec& spec, ExactMethod method = ExactMethod::BinomialSum);

struct MonteCarloEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
};

/// Seeded estimate from `samples` independent predictions (>= 100).
MonteCarloEstimate expected_dice_mc(const RandomModelSpec& spec, std::uint64_t samples,
                                    std::uint64_t seed);

struct CurvePoint {
    double p = 0.0;
    std::uint64_t n = 0;
    double e_d = 0.0;
    double std_error = 0.0; ///< 0 for exact rows
    std::string method;     ///< "exact" or "monte_carlo"
};

struct DiceCurve {
    std::vector<CurvePoint> points;
    bool monotone = true; ///< e_d non-decreasing along the (sorted) p grid
};

/// E_D for each p. `exact` selects the binomial summation, otherwise Monte Carlo.
DiceCurve dice_vs_p_curve(const std::vector<double>& p_values, std::uint64_t n,
                          std::uint64_t samples, std::uint64_t seed, bool exact);

} // namespace segeval

#endif // SEGEVAL_RANDOM_MODEL_HPP
