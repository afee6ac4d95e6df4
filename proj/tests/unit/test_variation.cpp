#include "pathflow/errors.hpp"
#include "pathflow/localtime.hpp"
#include "pathflow/rng.hpp"
#include "pathflow/variation.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace pathflow;

namespace {

// Maximum over every index subset of size >= 2.
double brute_force_sup(const std::vector<double>& s, double p)
{
    const std::size_t n = s.size();
    double best = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        double sum = 0.0;
        int prev = -1;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) {
                if (prev >= 0)
                    sum += std::pow(std::abs(s[i] - s[static_cast<std::size_t>(prev)]), p);
                prev = static_cast<int>(i);
            }
        best = std::max(best, sum);
    }
    return std::pow(best, 1.0 / p);
}

std::vector<double> unit_grid(std::size_t n)
{
    std::vector<double> g(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        g[i] = static_cast<double>(i) / static_cast<double>(n);
    return g;
}

}  // namespace

TEST_CASE("grid p-variation")
{
    const std::vector<double> zig{0.0, 1.0, 0.0, 1.0};
    CHECK(p_variation_grid(zig, 1.0) == 3.0);
    const std::vector<double> mono{0.5, 0.7, 1.9, 2.0};
    CHECK(p_variation_grid(mono, 1.0) == doctest::Approx(1.5));
    CHECK_THROWS_AS(p_variation_grid(zig, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(p_variation_grid(std::vector<double>{1.0}, 1.0), std::invalid_argument);
}

TEST_CASE("grid quadratic variation of brownian motion")
{
    const SamplePath b = simulate_brownian(1 << 15, 1.0, 0.0, 61);
    const double v = p_variation_grid(b.values, 2.0);
    CHECK(v * v > 0.9);
    CHECK(v * v < 1.1);
}

TEST_CASE("supremum p-variation examples")
{
    CHECK(p_variation_sup(std::vector<double>{0.0, 1.0, 0.0}, 2.0) == doctest::Approx(std::sqrt(2.0)));
    CHECK(p_variation_sup(std::vector<double>{0.0, 1.0, 2.0}, 2.0) == doctest::Approx(2.0));
    CHECK(p_variation_sup(std::vector<double>(7, 3.0), 1.5) == 0.0);
    CHECK_THROWS_AS(p_variation_sup(std::vector<double>(20, 0.0), 2.0, 10), too_large);
}

TEST_CASE("supremum p-variation against exhaustive search")
{
    std::uint64_t idx = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng::uniform(1, idx++) * 11);
        const double p = 1.0 + 3.0 * rng::uniform(1, idx++);
        std::vector<double> s(n);
        for (auto& v : s)
            v = rng::gaussian(2, idx++);
        const double want = brute_force_sup(s, p);
        REQUIRE(p_variation_sup(s, p) == doctest::Approx(want).epsilon(1e-12));
        REQUIRE(p_variation_extrema(s, p) == doctest::Approx(want).epsilon(1e-12));
        REQUIRE(p_variation_grid(s, p) <= want * (1.0 + 1e-12));
    }
}

TEST_CASE("supremum is non-increasing in p on normalised data")
{
    std::vector<double> s(40);
    for (std::size_t i = 0; i < s.size(); ++i)
        s[i] = 0.5 * std::sin(0.7 * static_cast<double>(i)) * rng::uniform(4, i);
    double prev = p_variation_sup(s, 1.0);
    for (double p : {1.5, 2.0, 3.0, 5.0}) {
        const double v = p_variation_sup(s, p);
        CHECK(v <= prev * (1.0 + 1e-12));
        prev = v;
    }
}

TEST_CASE("bivariation closed forms")
{
    const auto g = GridFunction2D::sample(unit_grid(4), unit_grid(4), [](double t, double) { return t * t; });
    const Bivariation bg = bivariation(g, 1.0, 1.0);
    CHECK(bg.norm1 == 0.0);

    const auto tx = GridFunction2D::sample(unit_grid(4), unit_grid(4), [](double t, double x) { return t * x; });
    const Bivariation b = bivariation(tx, 1.0, 1.0);
    CHECK(b.norm1 == doctest::Approx(1.0));
    CHECK(b.norm2 == doctest::Approx(1.0));
    CHECK_FALSE(b.sampled1);
}

TEST_CASE("bivariation of a tensor factorises")
{
    const auto u = [](double t) { return std::sin(5.0 * t); };
    const auto v = [](double x) { return x * x - x; };
    const auto t = unit_grid(16), x = unit_grid(12);
    const auto h = GridFunction2D::sample(t, x, [&](double a, double b) { return u(a) * v(b); });
    std::vector<double> us(t.size()), vs(x.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        us[i] = u(t[i]);
    for (std::size_t j = 0; j < x.size(); ++j)
        vs[j] = v(x[j]);
    const double spread = *std::max_element(vs.begin(), vs.end()) - *std::min_element(vs.begin(), vs.end());
    CHECK(bivariation(h, 1.5, 2.0).norm1 == doctest::Approx(spread * p_variation_sup(us, 1.5)).epsilon(1e-12));
}

TEST_CASE("pair support")
{
    CHECK(pair_support(5, 100).size() == 5);
    const auto s = pair_support(1000, 100);
    CHECK(s.size() * (s.size() - 1) / 2 <= 100);
    CHECK(s.front() == 0);
    CHECK(s.back() == 999);
}

TEST_CASE("joint variations")
{
    const auto u = [](double t) { return t * t; };
    const auto v = [](double x) { return std::exp(x); };
    const auto h = GridFunction2D::sample(unit_grid(8), unit_grid(8), [&](double t, double x) { return u(t) * v(x); });
    CHECK(joint_rv(h, 1.0, 1.0) == doctest::Approx((u(1) - u(0)) * (v(1) - v(0))).epsilon(1e-12));
    CHECK(joint_lv(h, 1.0, 1.0) == doctest::Approx((u(1) - u(0)) * (v(1) - v(0))).epsilon(1e-12));

    const auto flat = GridFunction2D::sample(unit_grid(8), unit_grid(8), [](double t, double) { return std::cos(t); });
    CHECK(joint_rv(flat, 2.0, 3.0) == 0.0);
    CHECK(joint_lv(flat, 2.0, 3.0) == 0.0);
}

TEST_CASE("joint variations grow under refinement")
{
    GridFunction2D h = GridFunction2D::sample(unit_grid(32), unit_grid(32), [](double, double) { return 0.0; });
    for (std::size_t k = 0; k < h.values.size(); ++k)
        h.values[k] = rng::gaussian(8, k);
    for (std::size_t k = 3; k > 0; --k) {
        CHECK(joint_rv(coarsen(h, k - 1), 3.0, 5.0) >= joint_rv(coarsen(h, k), 3.0, 5.0));
        CHECK(joint_lv(coarsen(h, k - 1), 1.0, 2.5) >= joint_lv(coarsen(h, k), 1.0, 2.5));
    }
}

TEST_CASE("Hoelder control constant")
{
    const auto tx = GridFunction2D::sample(unit_grid(8), unit_grid(5), [](double t, double x) { return t * x; });
    CHECK(holder_control_constant(tx, 1.0, 1.0) == doctest::Approx(1.0));
    const auto flat = GridFunction2D::sample(unit_grid(8), unit_grid(5), [](double t, double) { return t; });
    CHECK(holder_control_constant(flat, 1.0, 1.0) == 0.0);

    double prev = 0.0;
    for (std::size_t n : {16u, 32u, 64u, 128u}) {
        const auto h = GridFunction2D::sample(unit_grid(n), unit_grid(n), [](double t, double x) { return std::sqrt(t) * x; });
        const double c = holder_control_constant(h, 2.0, 1.0);
        if (prev > 0.0)
            CHECK(std::abs(c / prev - 1.0) < 0.1);
        prev = c;
    }
}

TEST_CASE("interpolation inequality")
{
    const auto flat = GridFunction2D::sample(unit_grid(4), unit_grid(4), [](double, double) { return 2.0; });
    const InterpolationResult c = interpolation_check(flat, 1.0, 2.0, 1.5);
    CHECK(c.lhs == 0.0);
    CHECK(c.rhs == 0.0);

    const auto r1 = GridFunction2D::sample(unit_grid(2), unit_grid(2),
                                           [](double t, double x) { return (t + t * t) * std::exp(x); });
    const InterpolationResult r = interpolation_check(r1, 1.0, 1.0, 2.0);
    CHECK(r.all_rectangles);
    CHECK(r.lhs <= r.rhs * (1.0 + 1e-9));
    CHECK(r.lhs > 0.0);
    CHECK_THROWS_AS(interpolation_check(r1, 2.0, 2.0, 1.5), std::invalid_argument);

    GridFunction2D h = GridFunction2D::sample(unit_grid(12), unit_grid(12), [](double, double) { return 0.0; });
    for (int trial = 0; trial < 20; ++trial) {
        for (std::size_t k = 0; k < h.values.size(); ++k)
            h.values[k] = rng::gaussian(90 + trial, k);
        const InterpolationResult g = interpolation_check(h, 1.0, 2.5, 1.5);
        REQUIRE(g.lhs <= g.rhs * (1.0 + 1e-9));
    }
}

TEST_CASE("exponent fit rejects a vanishing field")
{
    LocalTimeField f;
    f.levels = LevelGrid{-1.0, 1.0, 64};
    f.time_indices = {0, 1, 2, 3};
    f.values.assign(4 * 65, 0.0);
    f.eps = 0.0625;
    f.dt = 0.25;
    CHECK_THROWS_AS(holder_exponent_fit(f, HolderAxis::space), estimation_failed);
    CHECK_THROWS_AS(holder_exponent_fit(f, HolderAxis::time), estimation_failed);
}

TEST_CASE("stable order gate")
{
    CHECK(stable_orders_admissible(1.0, 1.2, 1.5));
    CHECK_FALSE(stable_orders_admissible(1.5, 3.0, 1.5));
    CHECK_FALSE(stable_orders_admissible(2.0 * 1.5 / 2.5, 1.3, 1.5));
    CHECK_FALSE(stable_orders_admissible(1.2, 1.1, 1.5));
    CHECK_FALSE(stable_orders_admissible(1.0, 1.0, 1.0));
    CHECK_THROWS_WITH_AS(check_stable_orders(1.0, 3.0, 1.5), "violated b < 2/(3-beta)", std::invalid_argument);

    VariationParams p;
    CHECK(p.young_condition() == (p.alpha / p.p + 1.0 / p.p_tilde > 1.0
                                  && (1.0 - p.alpha) / p.q + 1.0 / p.q_tilde > 1.0));
    CHECK(p.stable_condition());
}

TEST_CASE("dyadic grid coarsening")
{
    CHECK(coarse_indices(5, 2) == std::vector<std::size_t>{0, 2, 4});
    CHECK(coarse_indices(6, 4) == std::vector<std::size_t>{0, 4, 5});
    const auto h = GridFunction2D::sample(unit_grid(8), unit_grid(2), [](double t, double x) { return t + x; });
    const GridFunction2D c = coarsen(h, 1);
    CHECK(c.nt() == 5);
    CHECK(c.nx() == 2);
    CHECK(ladder_depth(h) == 4);
    GridFunction2D bad = h;
    bad.t[3] = bad.t[2];
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
