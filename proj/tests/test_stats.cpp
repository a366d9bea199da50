// SPDX-License-Identifier: Apache-2.0

#include "segeval/stats.hpp"

#include "support.hpp"

#include <doctest.h>

#include <numeric>

using namespace segeval;
using namespace testsupport;

TEST_CASE("uniform index is in range and reproducible")
{
    Rng a(5), b(5);
    for (int i = 0; i < 1000; ++i) {
        const auto v = uniform_index(a, 7);
        CHECK(v < 7);
        CHECK(v == uniform_index(b, 7));
    }
    CHECK_THROWS_AS(uniform_index(a, 0), std::invalid_argument);
    CHECK(derive_seed(42, 0) != derive_seed(42, 1));
}

TEST_CASE("percentile")
{
    CHECK(percentile({3, 1, 2}, 0.5) == 2.0);
    CHECK(percentile({0, 10}, 0.25) == 2.5);
    CHECK(percentile({4}, 0.95) == 4.0);
    CHECK_THROWS_AS(percentile({}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(percentile({1}, 1.5), std::invalid_argument);

    std::mt19937_64 rng(71);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> v(static_cast<std::size_t>(between(rng, 1, 40)));
        for (double& x : v)
            x = unit(rng);
        const double q = unit(rng);
        CHECK(percentile(v, q) == doctest::Approx(brute_percentile(v, q)).epsilon(1e-15));
    }
}

TEST_CASE("bootstrap on a constant sample is degenerate")
{
    const std::vector<double> v{5, 5, 5, 5};
    const auto ci = bootstrap_ci(v, Statistic::Median, BootstrapSpec{});
    CHECK(ci.point == 5.0);
    CHECK(ci.lo == 5.0);
    CHECK(ci.hi == 5.0);
    CHECK_THROWS_AS(bootstrap_ci(std::vector<double>{}, Statistic::Mean, BootstrapSpec{}),
                    std::invalid_argument);
    CHECK_THROWS_AS((BootstrapSpec{0, 0.95, 1}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((BootstrapSpec{10, 1.0, 1}.validate()), std::invalid_argument);
}

TEST_CASE("bootstrap is reproducible for a seed")
{
    const std::vector<double> v{1, 2, 3};
    const BootstrapSpec spec{1, 0.95, 9};
    const auto a = bootstrap_ci(v, Statistic::Mean, spec);
    const auto b = bootstrap_ci(v, Statistic::Mean, spec);
    CHECK(a.lo == b.lo);
    CHECK(a.hi == b.hi);
    CHECK(a.point == 2.0);
}

TEST_CASE("bootstrap CI brackets the estimate on continuous data")
{
    std::mt19937_64 rng(73);
    std::normal_distribution<double> normal;
    for (int t = 0; t < 20; ++t) {
        std::vector<double> v(50);
        for (double& x : v)
            x = normal(rng);
        for (auto s : {Statistic::Mean, Statistic::Median}) {
            const auto ci = bootstrap_ci(v, s, BootstrapSpec{1000, 0.95, static_cast<std::uint64_t>(t)});
            CHECK(ci.lo <= ci.point);
            CHECK(ci.point <= ci.hi);
        }
    }
}

TEST_CASE("median CI coverage on standard-normal samples")
{
    std::mt19937_64 rng(79);
    std::normal_distribution<double> normal;
    int covered = 0;
    for (int t = 0; t < 100; ++t) {
        std::vector<double> v(200);
        for (double& x : v)
            x = normal(rng);
        const auto ci = bootstrap_ci(v, Statistic::Median, BootstrapSpec{1000, 0.95, static_cast<std::uint64_t>(t)});
        covered += ci.lo <= 0.0 && 0.0 <= ci.hi;
    }
    MESSAGE("covered " << covered << "/100");
    CHECK(covered >= 90);
}

TEST_CASE("generic bootstrap skips undefined resamples")
{
    const std::vector<double> v{1, 2, 3, 4};
    auto mean_of = [&](std::span<const std::size_t> idx) -> std::optional<double> {
        double s = 0;
        for (auto i : idx)
            s += v[i];
        return s / static_cast<double>(idx.size());
    };
    const auto ci = bootstrap_ci(v.size(), mean_of, BootstrapSpec{200, 0.9, 3});
    REQUIRE(ci.has_value());
    CHECK(ci->point == 2.5);
    const auto direct = bootstrap_ci(v, Statistic::Mean, BootstrapSpec{200, 0.9, 3});
    CHECK(ci->lo == direct.lo);
    CHECK(ci->hi == direct.hi);

    auto never = [](std::span<const std::size_t>) -> std::optional<double> { return std::nullopt; };
    CHECK_FALSE(bootstrap_ci(4, never, BootstrapSpec{}).has_value());
}

TEST_CASE("mid-ranks")
{
    const std::vector<double> v{10, 20, 20, 5};
    CHECK(midranks(v) == std::vector<double>{2, 3.5, 3.5, 1});
}

TEST_CASE("Spearman")
{
    const std::vector<double> x{1, 2, 3};
    CHECK(*spearman(x, std::vector<double>{2, 4, 6}).rho == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(*spearman(x, std::vector<double>{6, 4, 2}).rho == doctest::Approx(-1.0).epsilon(1e-15));

    const std::vector<double> a{1, 2, 2, 4}, b{1, 3, 2, 4};
    const auto r = spearman(a, b);
    CHECK(*r.rho == doctest::Approx(std::sqrt(0.9)).epsilon(1e-14));
    CHECK(*r.rho == doctest::Approx(brute_spearman(a, b)).epsilon(1e-14));

    CHECK_FALSE(spearman(x, std::vector<double>{1, 1, 1}).rho.has_value());

    std::mt19937_64 rng(83);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = static_cast<std::size_t>(between(rng, 3, 25));
        std::vector<double> u(n), w(n);
        for (std::size_t i = 0; i < n; ++i) {
            u[i] = between(rng, 0, 6);
            w[i] = between(rng, 0, 6);
        }
        const auto s = spearman(u, w);
        const double oracle = brute_spearman(u, w);
        if (!std::isfinite(oracle)) {
            CHECK_FALSE(s.rho.has_value());
            continue;
        }
        CHECK(*s.rho == doctest::Approx(oracle).epsilon(1e-12));
        CHECK(*s.p_value >= 0.0);
        CHECK(*s.p_value <= 1.0);
    }
}

TEST_CASE("Spearman p-value against a precomputed fixture")
{
    // x = 1..10, y a fixed permutation. Reference values from scipy.stats.spearmanr.
    const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    const std::vector<double> y{3, 1, 4, 2, 6, 5, 9, 7, 10, 8};
    const auto r = spearman(x, y);
    CHECK(*r.rho == doctest::Approx(0.8666666666666665).epsilon(1e-12));
    CHECK(*r.p_value == doctest::Approx(0.0011735381801554687).epsilon(1e-9));
}

TEST_CASE("pairwise deletion")
{
    const std::vector<std::optional<double>> x{1, 2, std::nullopt, 4, 5};
    const std::vector<std::optional<double>> y{2, 4, 6, std::nullopt, 10};
    const auto r = spearman(x, y);
    CHECK(r.n == 3);
    CHECK(*r.rho == doctest::Approx(1.0));
}

TEST_CASE("correlation matrix")
{
    std::mt19937_64 rng(89);
    std::vector<NamedColumn> cols;
    for (int c = 0; c < 10; ++c) {
        NamedColumn col{"c" + std::to_string(c), {}};
        for (int i = 0; i < 20; ++i)
            col.values.push_back(unit(rng) < 0.1 ? std::nullopt : std::optional<double>(unit(rng)));
        cols.push_back(col);
    }
    cols.push_back({"copy", cols[0].values});
    const auto m = correlation_matrix(cols);
    const auto k = static_cast<Eigen::Index>(cols.size());
    for (Eigen::Index i = 0; i < k; ++i) {
        CHECK(m.rho(i, i) == 1.0);
        for (Eigen::Index j = 0; j < k; ++j) {
            CHECK(m.defined(i, j) == m.defined(j, i));
            if (m.defined(i, j)) {
                CHECK(m.rho(i, j) == m.rho(j, i));
                CHECK(m.p_value(i, j) == m.p_value(j, i));
            }
        }
    }
    CHECK(m.rho(0, k - 1) == doctest::Approx(1.0));
    CHECK_FALSE(m.insignificant(0, k - 1));
}

TEST_CASE("independent noise is usually masked")
{
    std::mt19937_64 rng(97);
    std::normal_distribution<double> normal;
    int masked = 0;
    for (int t = 0; t < 50; ++t) {
        NamedColumn a{"a", {}}, b{"b", {}};
        for (int i = 0; i < 20; ++i) {
            a.values.push_back(normal(rng));
            b.values.push_back(normal(rng));
        }
        const auto m = correlation_matrix({a, b});
        masked += m.insignificant(0, 1);
    }
    CHECK(masked >= 40);
}
