// SPDX-License-Identifier: Apache-2.0

#include "segeval/stats.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace segeval {

std::uint64_t uniform_index(Rng& rng, std::uint64_t bound)
{
    if (bound == 0)
        throw std::invalid_argument("uniform_index: bound must be > 0");
    // Reject the tail that would bias the modulo.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw;
    do {
        draw = rng();
    } while (draw >= limit);
    return draw % bound;
}

double uniform_unit(Rng& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index)
{
    // splitmix64 finalizer over the combined key
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double percentile(std::vector<double> values, double q)
{
    if (values.empty())
        throw std::invalid_argument("percentile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0))
        throw std::invalid_argument("percentile: q must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0)
        return values[lo];
    return values[lo] + frac * (values[hi] - values[lo]);
}

double median(std::span<const double> values)
{
    return percentile(std::vector<double>(values.begin(), values.end()), 0.5);
}

double mean(std::span<const double> values)
{
    if (values.empty())
        throw std::invalid_argument("mean of an empty sample");
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

void BootstrapSpec::validate() const
{
    if (repetitions < 1)
        throw std::invalid_argument("bootstrap repetitions must be >= 1");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw std::invalid_argument("bootstrap confidence must lie in (0, 1)");
}

namespace {

double apply_statistic(Statistic statistic, std::span<const double> values)
{
    return statistic == Statistic::Median ? median(values) : mean(values);
}

ConfidenceInterval interval_from(double point, std::vector<double> replicates, double confidence)
{
    const double tail = (1.0 - confidence) / 2.0;
    ConfidenceInterval ci;
    ci.point = point;
    ci.lo = percentile(replicates, tail);
    ci.hi = percentile(std::move(replicates), 1.0 - tail);
    return ci;
}

} // namespace

ConfidenceInterval bootstrap_ci(std::span<const double> values, Statistic statistic,
                                const BootstrapSpec& spec)
{
    spec.validate();
    if (values.empty())
        throw std::invalid_argument("bootstrap_ci: empty sample");

    Rng rng(spec.seed);
    std::vector<double> resample(values.size());
    std::vector<double> replicates;
    replicates.reserve(static_cast<std::size_t>(spec.repetitions));
    for (int r = 0; r < spec.repetitions; ++r) {
        for (double& v : resample)
            v = values[uniform_index(rng, values.size())];
        replicates.push_back(apply_statistic(statistic, resample));
    }
    return interval_from(apply_statistic(statistic, values), std::move(replicates), spec.confidence);
}

std::optional<ConfidenceInterval> bootstrap_ci(
    std::size_t n, const std::function<std::optional<double>(std::span<const std::size_t>)>& statistic,
    const BootstrapSpec& spec)
{
    spec.validate();
    if (n == 0)
        return std::nullopt;

    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    const auto point = statistic(all);
    if (!point)
        return std::nullopt;

    Rng rng(spec.seed);
    std::vector<std::size_t> idx(n);
    std::vector<double> replicates;
    for (int r = 0; r < spec.repetitions; ++r) {
        for (auto& i : idx)
            i = uniform_index(rng, n);
        if (auto value = statistic(idx))
            replicates.push_back(*value);
    }
    if (replicates.empty())
        return std::nullopt;
    return interval_from(*point, std::move(replicates), spec.confidence);
}

std::vector<double> midranks(std::span<const double> values)
{
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]])
            ++j;
        const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

SpearmanResult spearman(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size())
        throw std::invalid_argument("spearman: inputs differ in length");
    SpearmanResult result;
    result.n = x.size();
    if (result.n < 3)
        return result;

    const auto rx = midranks(x);
    const auto ry = midranks(y);
    const double mx = mean(rx);
    const double my = mean(ry);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < result.n; ++i) {
        const double dx = rx[i] - mx;
        const double dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        return result;

    const double rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    result.rho = rho;
    if (std::abs(rho) >= 1.0) {
        result.p_value = 0.0;
        return result;
    }
    const double df = static_cast<double>(result.n - 2);
    const double t = rho * std::sqrt(df / (1.0 - rho * rho));
    const boost::math::students_t dist(df);
    result.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
    return result;
}

SpearmanResult spearman(std::span<const std::optional<double>> x,
                        std::span<const std::optional<double>> y)
{
    if (x.size() != y.size())
        throw std::invalid_argument("spearman: inputs differ in length");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] && y[i]) {
            xs.push_back(*x[i]);
            ys.push_back(*y[i]);
        }
    }
    return spearman(std::span<const double>(xs), std::span<const double>(ys));
}

CorrelationMatrix correlation_matrix(const std::vector<NamedColumn>& columns, double alpha)
{
    if (columns.size() < 2)
        throw std::invalid_argument("correlation_matrix needs at least two columns");
    const auto k = static_cast<Eigen::Index>(columns.size());
    const double nan = std::numeric_limits<double>::quiet_NaN();

    CorrelationMatrix m;
    m.alpha = alpha;
    m.rho = Eigen::MatrixXd::Constant(k, k, nan);
    m.p_value = Eigen::MatrixXd::Constant(k, k, nan);
    m.defined.setConstant(k, k, false);
    m.insignificant.setConstant(k, k, false);
    m.n.setZero(k, k);
    for (const auto& c : columns)
        m.names.push_back(c.name);

    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = i; j < k; ++j) {
            const auto r = spearman(std::span<const std::optional<double>>(columns[i].values),
                                    std::span<const std::optional<double>>(columns[j].values));
            m.n(i, j) = m.n(j, i) = r.n;
            if (!r.rho)
                continue;
            const double rho = i == j ? 1.0 : *r.rho;
            const double p = i == j ? 0.0 : *r.p_value;
            m.rho(i, j) = m.rho(j, i) = rho;
            m.p_value(i, j) = m.p_value(j, i) = p;
            m.defined(i, j) = m.defined(j, i) = true;
            m.insignificant(i, j) = m.insignificant(j, i) = p > alpha;
        }
    }
    return m;
}

} // namespace segeval
