#include "app/config.hpp"
#include "app/runner.hpp"
#include "app/toml_lite.hpp"

#include "pathflow/grid.hpp"
#include "pathflow/variation.hpp"
#include "pathflow/verify.hpp"
#include "pathflow/young.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace pathflow;
using app::Json;

namespace {

const fs::path kFixtures = PATHFLOW_FIXTURE_DIR;
const fs::path kOut = PATHFLOW_ACCEPTANCE_OUT;

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

Json property(const std::string& file)
{
    return app::load_config_file(kFixtures / file).at("property");
}

app::RunOutcome run_fixture(const std::string& file)
{
    const auto cfg = app::parse_config(app::load_config_file(kFixtures / file));
    return app::run_experiment(cfg, kOut / fs::path(file).stem());
}

std::string gate_text(const app::RunOutcome& r)
{
    std::string s;
    for (const auto& g : r.gates)
        s += (s.empty() ? "" : ", ") + g.name + "=" + fmt(g.value) + (g.passed ? " ok" : " over " + fmt(g.limit));
    return s;
}

Verdict from_gates(const app::RunOutcome& r, const std::string& extra = "")
{
    return {r.passed() && !r.gates.empty(), gate_text(r) + extra};
}

Verdict c01()
{
    const auto r = run_fixture("c01_discrete_ito_square.toml");
    return from_gates(r);
}

Verdict c02()
{
    const auto r = run_fixture("c02_running_max.toml");
    return from_gates(r, "; median by level " + fmt(r.report["ladder"][0]["stats"]["median_abs"].get<double>()) + "/"
                             + fmt(r.report["ladder"][1]["stats"]["median_abs"].get<double>()) + "/"
                             + fmt(r.report["ladder"][2]["stats"]["median_abs"].get<double>()));
}

Verdict c03()
{
    const auto r = run_fixture("c03_lookback_fixed.toml");
    return from_gates(r, "; coverage " + fmt(r.report["stats"]["coverage"].get<double>()));
}

Verdict c04() { return from_gates(run_fixture("c04_partial_lookback.toml")); }

Verdict c05() { return from_gates(run_fixture("c05_occupation.toml")); }

GridFunction2D random_grid(std::mt19937_64& rng, std::size_t nt, std::size_t nx)
{
    std::uniform_real_distribution<double> step(0.01, 1.0);
    std::normal_distribution<double> val(0.0, 1.0);
    GridFunction2D g;
    double t = 0.0, x = -1.0;
    for (std::size_t i = 0; i < nt; ++i)
        g.t.push_back(t += step(rng));
    for (std::size_t j = 0; j < nx; ++j)
        g.x.push_back(x += step(rng));
    g.values.resize(nt * nx);
    for (double& v : g.values)
        v = val(rng);
    return g;
}

Verdict c06()
{
    const Json p = property("c06_summation_by_parts.toml");
    std::mt19937_64 rng(p["seed"].get<std::uint64_t>());
    const auto lo = p["min_size"].get<std::size_t>(), hi = p["max_size"].get<std::size_t>();
    const double tol = p["tolerance"].get<double>();
    std::uniform_int_distribution<std::size_t> size(lo, hi);
    double worst = 0.0;
    const auto n = p["n_grids"].get<std::size_t>();
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t nt = size(rng), nx = size(rng);
        GridFunction2D h = random_grid(rng, nt, nx);
        GridFunction2D G = random_grid(rng, nt, nx);
        G.t = h.t;
        G.x = h.x;
        const double direct = young_sum_2d(h, G);
        const double parts = summation_by_parts_2d(h, G).total();
        worst = std::max(worst, std::abs(parts - direct) / (1.0 + std::abs(direct)));
    }
    return {worst <= tol, std::to_string(n) + " grids, worst |sbp - direct|/(1+|direct|) = " + fmt(worst)};
}

std::vector<double> unit_grid(std::size_t n)
{
    std::vector<double> g(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        g[i] = static_cast<double>(i) / static_cast<double>(n);
    return g;
}

Verdict c07()
{
    const Json p = property("c07_young_closed_forms.toml");
    bool exact = true;
    std::size_t grids = 0;
    for (const auto& a : p["sizes"])
        for (const auto& b : p["sizes"]) {
            const auto t = unit_grid(a.get<std::size_t>()), x = unit_grid(b.get<std::size_t>());
            const auto h = GridFunction2D::sample(t, x, [](double, double) { return 1.0; });
            const auto G = GridFunction2D::sample(t, x, [](double s, double y) { return s * y; });
            exact = exact && young_integral_2d(h, G).value == 1.0;
            ++grids;
        }
    const auto n = p["fine_size"].get<std::size_t>();
    const auto t = unit_grid(n);
    const auto sx = [](double s, double y) { return s * y; };
    const double v = young_integral_2d(GridFunction2D::sample(t, t, sx), GridFunction2D::sample(t, t, sx)).value;
    const double err = std::abs(v - 0.25);
    return {exact && err <= p["tolerance"].get<double>(),
            "h=1: " + std::string(exact ? "exactly 1" : "not exact") + " on " + std::to_string(grids)
                + " grids; h=sx: " + fmt(v) + " (|err| " + fmt(err) + ")"};
}

double brute_pvar(const std::vector<double>& s, double p)
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

Verdict c08()
{
    const Json p = property("c08_pvariation_bruteforce.toml");
    std::mt19937_64 rng(p["seed"].get<std::uint64_t>());
    std::uniform_int_distribution<std::size_t> len(2, p["max_length"].get<std::size_t>());
    std::uniform_real_distribution<double> order(p["p_min"].get<double>(), p["p_max"].get<double>());
    std::normal_distribution<double> step(0.0, 1.0);
    std::size_t mismatches = 0;
    const auto n = p["n_sequences"].get<std::size_t>();
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<double> s(len(rng));
        double v = 0.0;
        for (double& x : s)
            x = v += step(rng);
        const double q = k % 5 == 0 ? 1.0 : k % 5 == 1 ? 2.0 : order(rng);
        mismatches += p_variation_sup(s, q) != brute_pvar(s, q);
    }
    return {mismatches == 0, std::to_string(n) + " sequences, " + std::to_string(mismatches) + " mismatches"};
}

Verdict c09()
{
    const auto a = run_fixture("c09_holder_beta15.toml");
    const auto b = run_fixture("c09_holder_beta20.toml");
    const auto h = [](const app::RunOutcome& r) {
        return fmt(r.report["holder"]["space_mean"].get<double>()) + "/" + fmt(r.report["holder"]["time_mean"].get<double>());
    };
    return {a.passed() && b.passed() && !a.gates.empty() && !b.gates.empty(),
            "beta=1.5 space/time " + h(a) + " (targets 0.25/0.1667); beta=2 " + h(b) + " (targets 0.5/0.25)"};
}

Verdict c10() { return from_gates(run_fixture("c10_fps.toml")); }

Verdict c11() { return from_gates(run_fixture("c11_cross_route.toml")); }

bool oracle_admissible(double a, double b, double beta)
{
    const bool beta_ok = 1.0 < beta && beta <= 2.0;
    if (!beta_ok)
        return false;
    const double a_hi = 2.0 * beta / (beta + 1.0);
    const double b_hi = 2.0 / (3.0 - beta);
    return 1.0 <= a && a < a_hi && 1.0 <= b && b < b_hi && a <= b;
}

Verdict c12()
{
    const Json p = property("c12_parameter_gates.toml");
    std::mt19937_64 rng(p["seed"].get<std::uint64_t>());
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto n = p["n_triples"].get<std::size_t>();
    const SamplePath path = simulate_brownian(64, 1.0, 0.0, 1);
    const LevelGrid grid = make_level_grid(path.values, 0.2);
    const FunctionalSpec F = make_identity();
    std::size_t wrong = 0, boundary = 0, accepted = 0;
    for (std::size_t k = 0; k < n; ++k) {
        double beta = 1.0 + u(rng);
        if (k % 97 == 0)
            beta = 2.0;
        double a = 0.8 + 1.2 * u(rng), b = 0.8 + 1.6 * u(rng);
        switch (k % 7) {
        case 0: a = 2.0 * beta / (beta + 1.0); ++boundary; break;
        case 1: b = 2.0 / (3.0 - beta); ++boundary; break;
        case 2: a = 1.0; break;
        case 3: b = a; break;
        default: break;
        }
        const bool expect = oracle_admissible(a, b, beta);
        bool got = true;
        try {
            check_stable_orders(a, b, beta);
        } catch (const std::invalid_argument&) {
            got = false;
        }
        if (got != expect || stable_orders_admissible(a, b, beta) != expect)
            ++wrong;
        if (k % 50 == 0) {
            SamplePath q = path;
            q.beta = beta;
            VariationParams vp;
            vp.a = a;
            vp.b = b;
            vp.beta = beta;
            bool ran = true;
            try {
                decompose_stable(F, q, grid, 0.2, 64, vp);
            } catch (const std::invalid_argument&) {
                ran = false;
            }
            wrong += ran != expect;
        }
        accepted += expect;
    }
    return {wrong == 0, std::to_string(n) + " triples (" + std::to_string(accepted) + " admissible, "
                            + std::to_string(boundary) + " on a boundary), " + std::to_string(wrong) + " disagreements"};
}

Verdict c13()
{
    const auto r = run_fixture("c13_bivariation.toml");
    return from_gates(r);
}

Verdict c14()
{
    const auto r = run_fixture("c14_interpolation.toml");
    const Json p = property("c14_interpolation_rank_one.toml");
    std::mt19937_64 rng(p["seed"].get<std::uint64_t>());
    std::uniform_int_distribution<std::size_t> size(p["min_size"].get<std::size_t>(), p["max_size"].get<std::size_t>());
    std::normal_distribution<double> g(0.0, 1.0);
    const double a = p["a"].get<double>(), b = p["b"].get<double>(), ap = p["a_prime"].get<double>();
    std::size_t bad = 0;
    double worst = 0.0;
    const auto n = p["n_fields"].get<std::size_t>();
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t nt = size(rng), nx = size(rng);
        std::vector<double> u(nt), v(nx), t(nt), x(nx);
        for (std::size_t i = 0; i < nt; ++i) {
            u[i] = g(rng);
            t[i] = static_cast<double>(i);
        }
        for (std::size_t j = 0; j < nx; ++j) {
            v[j] = g(rng);
            x[j] = static_cast<double>(j);
        }
        GridFunction2D h;
        h.t = t;
        h.x = x;
        for (std::size_t i = 0; i < nt; ++i)
            for (std::size_t j = 0; j < nx; ++j)
                h.values.push_back(u[i] * v[j]);
        const auto res = interpolation_check(h, a, b, ap);
        if (!(res.lhs <= res.rhs * (1.0 + 1e-9)))
            ++bad;
        if (res.rhs > 0.0)
            worst = std::max(worst, res.lhs / res.rhs);
    }
    const std::size_t fields = r.report["paths"].size();
    return {r.passed() && !r.gates.empty() && bad == 0,
            std::to_string(fields) + " local-time fields (worst lhs/rhs "
                + fmt(r.report["interpolation_worst_ratio"].get<double>()) + "), " + std::to_string(n)
                + " rank-one fields (worst " + fmt(worst) + ", " + std::to_string(bad) + " violations)"};
}

}  // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
        {"discrete Ito exactness for c(t)^2", c01},
        {"running-max identity", c02},
        {"fixed-strike lookback", c03},
        {"partial lookback", c04},
        {"occupation formula", c05},
        {"2D summation by parts", c06},
        {"2D Young closed forms", c07},
        {"p-variation DP vs brute force", c08},
        {"local-time Hoelder exponents", c09},
        {"FPS path-dependent formula", c10},
        {"cross-route agreement", c11},
        {"stable parameter gates", c12},
        {"bivariation stability", c13},
        {"interpolation inequality", c14},
    };
    std::vector<int> only;
    for (int i = 1; i < argc; ++i)
        only.push_back(std::atoi(argv[i]));
    fs::create_directories(kOut);
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end())
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[k].second();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %2d %-36s %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", id, criteria[k].first,
                    v.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !v.pass;
    }
    std::printf("%d of %zu criteria failed\n", failed, only.empty() ? criteria.size() : only.size());
    return failed == 0 ? 0 : 1;
}
