#include "pathflow/rng.hpp"
#include "pathflow/young.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace pathflow;

namespace {

std::vector<double> unit_grid(std::size_t n)
{
    std::vector<double> g(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        g[i] = static_cast<double>(i) / static_cast<double>(n);
    return g;
}

GridFunction2D random_field(std::size_t nt, std::size_t nx, std::uint64_t seed)
{
    GridFunction2D f = GridFunction2D::sample(unit_grid(nt - 1), unit_grid(nx - 1), [](double, double) { return 0.0; });
    for (std::size_t k = 0; k < f.values.size(); ++k)
        f.values[k] = rng::gaussian(seed, k);
    return f;
}

// Left-point double sum written out cell by cell.
double direct_2d(const GridFunction2D& h, const GridFunction2D& G)
{
    double s = 0.0;
    for (std::size_t i = 1; i < G.nt(); ++i)
        for (std::size_t j = 1; j < G.nx(); ++j)
            s += h.at(i - 1, j - 1) * (G.at(i, j) - G.at(i - 1, j) - G.at(i, j - 1) + G.at(i - 1, j - 1));
    return s;
}

}  // namespace

TEST_CASE("one dimensional sums")
{
    const std::vector<double> h{1.0, 2.0, -1.0, 0.5};
    const std::vector<double> flat(4, 3.0);
    CHECK(young_integral_1d(h, flat) == 0.0);
    const std::vector<double> G{0.0, 0.3, -0.2, 1.7};
    CHECK(young_integral_1d(std::vector<double>(4, 1.0), G) == doctest::Approx(1.7));
    CHECK(young_integral_1d(h, G) == doctest::Approx(1.0 * 0.3 + 2.0 * -0.5 + -1.0 * 1.9));
    CHECK_THROWS_AS(young_integral_1d(h, std::vector<double>(3, 0.0)), std::invalid_argument);

    const auto t = unit_grid(1024);
    CHECK(std::abs(young_integral_1d(t, t) - 0.5) < 2e-3);
}

TEST_CASE("separable integrators integrate to zero")
{
    const auto G = GridFunction2D::sample(unit_grid(16), unit_grid(9), [](double s, double x) { return std::sin(s) + x * x; });
    const GridFunction2D h = random_field(17, 10, 3);
    CHECK(std::abs(young_integral_2d(h, G).value) < 1e-13);
}

TEST_CASE("product integrator telescopes")
{
    for (std::size_t n : {1u, 2u, 8u, 64u}) {
        const auto G = GridFunction2D::sample(unit_grid(n), unit_grid(n), [](double s, double x) { return s * x; });
        const auto h = GridFunction2D::sample(unit_grid(n), unit_grid(n), [](double, double) { return 1.0; });
        const Integral2DResult r = young_integral_2d(h, G);
        CHECK(r.value == doctest::Approx(1.0).epsilon(1e-14));
        for (double v : r.ladder_values)
            CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("product integrand against product integrator")
{
    const auto sx = [](double s, double x) { return s * x; };
    const auto G = GridFunction2D::sample(unit_grid(512), unit_grid(512), sx);
    const Integral2DResult r = young_integral_2d(G, G);
    CHECK(std::abs(r.value - 0.25) < 1e-3);
    CHECK(r.converged == (r.cauchy_gap <= 1e-3 * (1.0 + std::abs(r.value))));
    CHECK(r.ladder_values.size() == ladder_depth(G));
    CHECK_FALSE(r.edge_noncompliant);
}

TEST_CASE("cauchy gaps shrink on smooth data")
{
    const auto f = [](double s, double x) { return std::exp(s) * std::sin(2.0 * x); };
    const auto g = [](double s, double x) { return std::cos(s) * std::exp(x); };
    std::vector<double> gaps;
    for (std::size_t n : {64u, 128u, 256u, 512u}) {
        const auto h = GridFunction2D::sample(unit_grid(n), unit_grid(n), f);
        const auto G = GridFunction2D::sample(unit_grid(n), unit_grid(n), g);
        gaps.push_back(young_integral_2d(h, G).cauchy_gap);
    }
    for (std::size_t k = 1; k < gaps.size(); ++k)
        CHECK(gaps[k - 1] / gaps[k] >= 1.5);
}

TEST_CASE("two dimensional sum matches direct evaluation and is bilinear")
{
    const GridFunction2D h1 = random_field(9, 7, 10), h2 = random_field(9, 7, 11);
    const GridFunction2D G1 = random_field(9, 7, 12), G2 = random_field(9, 7, 13);
    CHECK(young_integral_2d(h1, G1).value == doctest::Approx(direct_2d(h1, G1)).epsilon(1e-13));
    GridFunction2D hs = h1, Gs = G1;
    for (std::size_t k = 0; k < hs.values.size(); ++k) {
        hs.values[k] = 2.0 * h1.values[k] - 3.0 * h2.values[k];
        Gs.values[k] = G1.values[k] + 0.5 * G2.values[k];
    }
    const double lin_h = 2.0 * young_sum_2d(h1, G1) - 3.0 * young_sum_2d(h2, G1);
    CHECK(young_sum_2d(hs, G1) == doctest::Approx(lin_h).epsilon(1e-12));
    const double lin_G = young_sum_2d(h1, G1) + 0.5 * young_sum_2d(h1, G2);
    CHECK(young_sum_2d(h1, Gs) == doctest::Approx(lin_G).epsilon(1e-12));
}

TEST_CASE("grid mismatch is rejected")
{
    const GridFunction2D a = random_field(5, 5, 1), b = random_field(5, 6, 2);
    CHECK_THROWS_AS(young_integral_2d(a, b), std::invalid_argument);
    CHECK_THROWS_AS(summation_by_parts_2d(a, b), std::invalid_argument);
}

TEST_CASE("edge compliance flag")
{
    const auto G = GridFunction2D::sample(unit_grid(4), unit_grid(4), [](double s, double x) { return s * x + 1.0; });
    CHECK(young_integral_2d(G, G).edge_noncompliant);
}

TEST_CASE("summation by parts on random grids")
{
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const GridFunction2D h = random_field(8, 8, 100 + seed), G = random_field(8, 8, 200 + seed);
        const double direct = direct_2d(h, G);
        CHECK(std::abs(summation_by_parts_2d(h, G).total() - direct) <= 1e-12 * (1.0 + std::abs(direct)));
    }
}

TEST_CASE("summation by parts degenerate inputs")
{
    const GridFunction2D G = random_field(6, 5, 7);
    const auto h = GridFunction2D::sample(G.t, G.x, [](double, double) { return 4.0; });
    const SummationByParts s = summation_by_parts_2d(h, G);
    CHECK(s.interior == 0.0);
    CHECK(s.total() == doctest::Approx(young_sum_2d(h, G)).epsilon(1e-12));

    const auto zero = GridFunction2D::sample(G.t, G.x, [](double, double) { return 0.0; });
    const SummationByParts z = summation_by_parts_2d(random_field(6, 5, 8), zero);
    CHECK(z.interior == 0.0);
    CHECK(z.boundary_time == 0.0);
    CHECK(z.boundary_space == 0.0);
    CHECK(z.corner == 0.0);
}

TEST_CASE("forward stochastic sums")
{
    const SamplePath p = simulate_brownian(1000, 1.0, 0.2, 5);
    CHECK(ito_forward_integral(std::vector<double>(1000, 1.0), p, 700) == doctest::Approx(p.values[700] - p.values[0]));
    CHECK(ito_forward_integral(std::vector<double>(1000, 0.0), p, 1000) == 0.0);
    std::vector<double> twice(1001);
    double qv = 0.0;
    for (std::size_t k = 0; k <= 1000; ++k)
        twice[k] = 2.0 * p.values[k];
    for (std::size_t k = 1; k <= 1000; ++k)
        qv += (p.values[k] - p.values[k - 1]) * (p.values[k] - p.values[k - 1]);
    const double want = p.values[1000] * p.values[1000] - p.values[0] * p.values[0] - qv;
    CHECK(ito_forward_integral(twice, p, 1000) == doctest::Approx(want).epsilon(1e-12));
    CHECK_THROWS_AS(ito_forward_integral(std::vector<double>(10, 1.0), p, 11), std::invalid_argument);
    CHECK_THROWS_AS(ito_forward_integral(twice, p, 1001), std::invalid_argument);
}

TEST_CASE("forward sums against a smooth path converge")
{
    double prev_err = 1.0;
    for (std::size_t n : {64u, 256u, 1024u}) {
        const SamplePath p = pathflow::testing::linear_path(n, 0.0, 1.0);
        std::vector<double> f(n + 1);
        for (std::size_t k = 0; k <= n; ++k)
            f[k] = std::cos(p.values[k]);
        const double err = std::abs(ito_forward_integral(f, p, n) - std::sin(1.0));
        CHECK(err < prev_err);
        prev_err = err;
    }
    CHECK(prev_err < 1e-3);
}
