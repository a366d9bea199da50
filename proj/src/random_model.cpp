// SPDX-License-Identifier: Apache-2.0

#include "segeval/random_model.hpp"

#include "segeval/stats.hpp"

#include <boost/random/binomial_distribution.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace segeval {

RandomModelSpec RandomModelSpec::from_p(std::uint64_t n, double p)
{
    const double k = std::round(p * static_cast<double>(n));
    RandomModelSpec s{n, p, k < 0.0 ? 0 : static_cast<std::uint64_t>(k)};
    s.validate();
    return s;
}

RandomModelSpec RandomModelSpec::with_reference(std::uint64_t n, double p, std::uint64_t ref_positive)
{
    RandomModelSpec s{n, p, ref_positive};
    s.validate();
    return s;
}

void RandomModelSpec::validate() const
{
    if (!(p > 0.0 && p <= 1.0))
        throw std::invalid_argument("random model: p must lie in (0, 1], got " + std::to_string(p));
    if (ref_positive < 1 || ref_positive > n)
        throw std::invalid_argument("random model: reference size " + std::to_string(ref_positive) +
                                    " outside [1, " + std::to_string(n) + "]");
}

namespace {

// Binomial(count, p) probabilities, entries below kTiny left out of the
// returned [first, first + size) window.
struct BinomialPmf {
    std::uint64_t first = 0;
    std::vector<double> prob;
};

constexpr double kTiny = 1e-30;

BinomialPmf binomial_pmf(std::uint64_t count, double p)
{
    BinomialPmf out;
    if (count == 0) {
        out.prob = {1.0};
        return out;
    }
    if (p == 1.0) {
        out.first = count;
        out.prob = {1.0};
        return out;
    }
    const double lp = std::log(p);
    const double lq = std::log1p(-p);
    const double lfact_n = std::lgamma(static_cast<double>(count) + 1.0);
    auto log_pmf = [&](std::uint64_t x) {
        const double xd = static_cast<double>(x);
        const double rest = static_cast<double>(count - x);
        return lfact_n - std::lgamma(xd + 1.0) - std::lgamma(rest + 1.0) + xd * lp + rest * lq;
    };

    const auto mode = std::min<std::uint64_t>(
        count, static_cast<std::uint64_t>(std::floor((static_cast<double>(count) + 1.0) * p)));
    std::uint64_t lo = mode, hi = mode;
    while (lo > 0 && std::exp(log_pmf(lo - 1)) > kTiny)
        --lo;
    while (hi < count && std::exp(log_pmf(hi + 1)) > kTiny)
        ++hi;
    out.first = lo;
    out.prob.reserve(hi - lo + 1);
    for (std::uint64_t x = lo; x <= hi; ++x)
        out.prob.push_back(std::exp(log_pmf(x)));
    return out;
}

double dice_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t ref_positive)
{
    // 2TP / (2TP + FN + FP) with FN = k - TP
    const double den = static_cast<double>(tp + ref_positive + fp);
    return 2.0 * static_cast<double>(tp) / den;
}

double by_enumeration(const RandomModelSpec& s)
{
    if (s.n > kMaxEnumerationN)
        throw CapacityError("enumeration supports n <= " + std::to_string(kMaxEnumerationN) +
                            ", got " + std::to_string(s.n));
    const auto n = static_cast<unsigned>(s.n);
    std::vector<double> weight(n + 1);
    for (unsigned c = 0; c <= n; ++c)
        weight[c] = std::pow(s.p, c) * std::pow(1.0 - s.p, n - c);

    const std::uint64_t ref_bits = (std::uint64_t{1} << s.ref_positive) - 1;
    double sum = 0.0;
    for (std::uint64_t pred = 0; pred < (std::uint64_t{1} << n); ++pred) {
        const auto predicted = static_cast<unsigned>(std::popcount(pred));
        const auto tp = static_cast<unsigned>(std::popcount(pred & ref_bits));
        if (tp == 0)
            continue;
        sum += weight[predicted] * 2.0 * tp / static_cast<double>(predicted + s.ref_positive);
    }
    return sum;
}

double by_binomial_sum(const RandomModelSpec& s)
{
    if (s.n > kMaxBinomialN)
        throw CapacityError("binomial summation supports n <= " + std::to_string(kMaxBinomialN) +
                            ", got " + std::to_string(s.n));
    const BinomialPmf tp_pmf = binomial_pmf(s.ref_positive, s.p);
    const BinomialPmf fp_pmf = binomial_pmf(s.n - s.ref_positive, s.p);
    double sum = 0.0;
    for (std::size_t a = 0; a < tp_pmf.prob.size(); ++a) {
        const std::uint64_t tp = tp_pmf.first + a;
        if (tp == 0)
            continue;
        double inner = 0.0;
        for (std::size_t b = 0; b < fp_pmf.prob.size(); ++b)
            inner += fp_pmf.prob[b] * dice_from_counts(tp, fp_pmf.first + b, s.ref_positive);
        sum += tp_pmf.prob[a] * inner;
    }
    return sum;
}

} // namespace

double expected_dice_exact(const RandomModelSpec& spec, ExactMethod method)
{
    spec.validate();
    return method == ExactMethod::Enumeration ? by_enumeration(spec) : by_binomial_sum(spec);
}

MonteCarloEstimate expected_dice_mc(const RandomModelSpec& spec, std::uint64_t samples,
                                    std::uint64_t seed)
{
    spec.validate();
    if (samples < 100)
        throw std::invalid_argument("Monte Carlo needs at least 100 samples");

    // TP ~ Bin(k, p) and FP ~ Bin(n - k, p) are exactly the counts produced by
    // n independent Bernoulli(p) voxel draws; Dice depends on nothing else.
    constexpr std::uint64_t kBatch = 4096;
    const std::uint64_t batches = (samples + kBatch - 1) / kBatch;
    double total_mean = 0.0, total_m2 = 0.0;
    std::uint64_t total_count = 0;
    for (std::uint64_t b = 0; b < batches; ++b) {
        Rng rng(derive_seed(seed, b));
        boost::random::binomial_distribution<std::int64_t, double> tp_draw(
            static_cast<std::int64_t>(spec.ref_positive), spec.p);
        boost::random::binomial_distribution<std::int64_t, double> fp_draw(
            static_cast<std::int64_t>(spec.n - spec.ref_positive), spec.p);
        const std::uint64_t count = std::min(kBatch, samples - b * kBatch);
        double mean = 0.0, m2 = 0.0;
        for (std::uint64_t i = 0; i < count; ++i) {
            const bool certain = spec.p == 1.0;
            const std::uint64_t tp = certain ? spec.ref_positive : static_cast<std::uint64_t>(tp_draw(rng));
            const std::uint64_t fp = certain || spec.n == spec.ref_positive ? spec.n - spec.ref_positive
                                                                            : static_cast<std::uint64_t>(fp_draw(rng));
            const double dice = dice_from_counts(tp, fp, spec.ref_positive);
            const double delta = dice - mean;
            mean += delta / static_cast<double>(i + 1);
            m2 += delta * (dice - mean);
        }
        // Chan et al. merge, in batch order.
        const double na = static_cast<double>(total_count);
        const double nb = static_cast<double>(count);
        const double delta = mean - total_mean;
        total_mean += delta * nb / (na + nb);
        total_m2 += m2 + delta * delta * na * nb / (na + nb);
        total_count += count;
    }

    MonteCarloEstimate out;
    out.samples = total_count;
    out.estimate = total_mean;
    const double variance = total_m2 / static_cast<double>(total_count - 1);
    out.std_error = std::sqrt(variance / static_cast<double>(total_count));
    return out;
}

DiceCurve dice_vs_p_curve(const std::vector<double>& p_values, std::uint64_t n,
                          std::uint64_t samples, std::uint64_t seed, bool exact)
{
    DiceCurve curve;
    for (std::size_t i = 0; i < p_values.size(); ++i) {
        const double p = p_values[i];
        if (!(p > 0.0 && p < 1.0))
            throw std::invalid_argument("p grid values must lie in (0, 1)");
        const auto spec = RandomModelSpec::from_p(n, p);
        CurvePoint point{p, n, 0.0, 0.0, exact ? "exact" : "monte_carlo"};
        if (exact) {
            point.e_d = expected_dice_exact(spec);
        } else {
            const auto mc = expected_dice_mc(spec, samples, derive_seed(seed, i));
            point.e_d = mc.estimate;
            point.std_error = mc.std_error;
        }
        curve.points.push_back(point);
    }

    std::vector<CurvePoint> sorted = curve.points;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const CurvePoint& a, const CurvePoint& b) { return a.p < b.p; });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i].e_d < sorted[i - 1].e_d)
            curve.monotone = false;
    return curve;
}

} // namespace segeval
