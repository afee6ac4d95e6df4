#include "pathflow/verify.hpp"

#include "pathflow/errors.hpp"
#include "pathflow/grid.hpp"
#include "pathflow/young.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace pathflow {

std::string to_string(Formula f)
{
    switch (f) {
    case Formula::smooth_c12: return "smooth_c12";
    case Formula::singular_curve: return "singular_curve";
    case Formula::young_pq: return "young_pq";
    case Formula::stable_ab: return "stable_ab";
    }
    return "unknown";
}

Formula formula_from_string(const std::string& name)
{
    if (name == "smooth_c12") return Formula::smooth_c12;
    if (name == "singular_curve") return Formula::singular_curve;
    if (name == "young_pq") return Formula::young_pq;
    if (name == "stable_ab") return Formula::stable_ab;
    throw std::invalid_argument("unknown formula '" + name + "'");
}

double DecompositionReport::scaled_residual() const
{
    const double scale = std::max(std::abs(lhs), terms.magnitude());
    return scale > 0.0 ? std::abs(residual) / scale : std::abs(residual);
}

void finalize(DecompositionReport& r) { r.residual = r.lhs - r.terms.sum(); }

std::size_t default_t_index(const SamplePath& path)
{
    return stop_at_level(path, 10.0 * (1.0 + std::abs(path.z))).stop_index;
}

namespace {

void check_t_index(const SamplePath& path, std::size_t t_index)
{
    if (t_index > path.n_steps)
        throw std::invalid_argument("t_index beyond the path");
    if (t_index == 0)
        throw std::invalid_argument("t_index must be positive");
}

LocalTimeOptions time_options(std::size_t t_index, const DecomposeOptions& opts)
{
    LocalTimeOptions lo;
    lo.upto = t_index;
    lo.max_time_points = opts.max_time_points;
    return lo;
}

double trapezoid(const std::vector<std::size_t>& times, const std::vector<double>& g, double dt)
{
    double s = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i)
        s += 0.5 * (g[i - 1] + g[i]) * static_cast<double>(times[i] - times[i - 1]) * dt;
    return s;
}

void require(bool cap, const char* what)
{
    if (!cap)
        throw unsupported_capability(std::string("functional lacks ") + what);
}

PathMeta meta_of(const SamplePath& path, double eps, std::size_t t_index)
{
    return {path.seed, path.n_steps, eps, t_index};
}

DecompositionReport singular_impl(const FunctionalSpec& F, const SamplePath& path, const QVPath& qv,
                                  const LevelGrid* levels, double eps, std::size_t t, const DecomposeOptions& opts)
{
    check_t_index(path, t);
    const auto& c = F.caps();
    require(c.curve, "a singular curve");
    require(c.jump, "a derivative jump");
    require(c.weak, "a weak derivative");
    require(c.second_left, "a second left derivative");
    require(c.horizontal, "a horizontal derivative");

    const auto& X = path.values;
    const auto& Q = qv.cumulative;
    std::vector<double> gamma(X.size()), jump(t + 1), horiz(t + 1);
    DecompositionReport r;
    r.formula = Formula::singular_curve;
    auto st = F.start(FunctionalContext::of(path));
    double f0 = 0.0;
    for (std::size_t k = 0; k <= t; ++k) {
        gamma[k] = st->curve(X[k]);
        jump[k] = st->jump(X[k]);
        horiz[k] = st->horizontal(X[k]);
        if (k == 0)
            f0 = st->value(X[0]);
        if (k == t) {
            r.value_end = st->value(X[t]);
            break;
        }
        r.terms.stochastic += st->weak(X[k]) * (X[k + 1] - X[k]);
        r.terms.second_order_or_localtime += 0.5 * st->second_left(X[k]) * (Q[k + 1] - Q[k]);
        st->push(X[k]);
    }
    std::fill(gamma.begin() + static_cast<std::ptrdiff_t>(t) + 1, gamma.end(), gamma[t]);
    r.lhs = r.value_end - f0;

    LevelGrid grid;
    if (levels) {
        grid = *levels;
    } else {
        std::vector<double> d(t + 1);
        for (std::size_t k = 0; k <= t; ++k)
            d[k] = X[k] - gamma[k];
        grid = make_level_grid(d, eps, opts.per_eps, opts.margin_eps, opts.max_levels);
    }
    const LocalTimeField field = shifted_local_time(path, gamma, grid, eps, time_options(t, opts));
    const auto& times = field.time_indices;
    std::vector<double> js(times.size()), ls(times.size()), hs(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        js[i] = jump[times[i]];
        hs[i] = horiz[times[i]];
        // Window [-2 eps, 0] of X - gamma: the left local time at the curve.
        ls[i] = field.at_level(i, -eps);
    }
    r.terms.horizontal = trapezoid(times, hs, path.dt());
    r.terms.jump_localtime = 0.5 * young_integral_1d(js, ls);
    r.meta = meta_of(path, eps, t);
    finalize(r);
    return r;
}

DecompositionReport young_impl(const FunctionalSpec& F, const SamplePath& path, const LocalTimeField& field,
                               std::size_t t)
{
    const auto& c = F.caps();
    require(c.weak, "a weak derivative");
    require(c.horizontal, "a horizontal derivative");
    const auto& X = path.values;
    const auto& times = field.time_indices;
    GridFunction2D G = GridFunction2D::from_field(field);
    GridFunction2D h;
    h.t = G.t;
    h.x = G.x;
    h.values.assign(G.values.size(), 0.0);
    std::vector<double> hs(times.size());

    DecompositionReport r;
    r.formula = Formula::young_pq;
    auto st = F.start(FunctionalContext::of(path));
    double f0 = 0.0;
    std::size_t row = 0;
    for (std::size_t k = 0; k <= t; ++k) {
        if (row < times.size() && times[row] == k) {
            for (std::size_t j = 0; j < h.nx(); ++j)
                h.at(row, j) = st->weak(h.x[j]);
            hs[row] = st->horizontal(X[k]);
            ++row;
        }
        if (k == 0)
            f0 = st->value(X[0]);
        if (k == t) {
            r.value_end = st->value(X[t]);
            break;
        }
        r.terms.stochastic += st->weak(X[k]) * (X[k + 1] - X[k]);
        st->push(X[k]);
    }
    r.lhs = r.value_end - f0;
    r.terms.horizontal = trapezoid(times, hs, path.dt());
    r.terms.second_order_or_localtime = -0.5 * young_integral_2d(h, G).value;
    r.meta = meta_of(path, field.eps, t);
    finalize(r);
    return r;
}

}  // namespace

DecompositionReport decompose_smooth(const MollifiedFunctional& M, const SamplePath& path, const QVPath& qv,
                                     std::size_t t, const DecomposeOptions& opts)
{
    check_t_index(path, t);
    if (qv.cumulative.size() != path.values.size())
        throw std::invalid_argument("quadratic variation does not belong to the path");
    const auto& X = path.values;
    const auto& Q = qv.cumulative;
    const auto times = default_time_indices(t, opts.max_time_points);
    const bool has_h = M.base().caps().horizontal;
    std::vector<double> hs(times.size(), 0.0);

    DecompositionReport r;
    r.formula = Formula::smooth_c12;
    auto st = M.base().start(FunctionalContext::of(path));
    double f0 = 0.0;
    std::size_t row = 0;
    for (std::size_t k = 0; k <= t; ++k) {
        if (row < times.size() && times[row] == k) {
            hs[row] = has_h ? M.horizontal(*st, X[k]) : 0.0;
            ++row;
        }
        if (k == 0)
            f0 = M.value(*st, X[0]);
        if (k == t) {
            r.value_end = M.value(*st, X[t]);
            break;
        }
        r.terms.stochastic += M.first(*st, X[k]) * (X[k + 1] - X[k]);
        r.terms.second_order_or_localtime += 0.5 * M.second(*st, X[k]) * (Q[k + 1] - Q[k]);
        st->push(X[k]);
    }
    if (!has_h)
        require(false, "a horizontal derivative");
    r.lhs = r.value_end - f0;
    r.terms.horizontal = trapezoid(times, hs, path.dt());
    r.meta = meta_of(path, 0.0, t);
    finalize(r);
    return r;
}

DecompositionReport decompose_singular(const FunctionalSpec& F, const SamplePath& path, const QVPath& qv,
                                       const LevelGrid& levels, double eps, std::size_t t_index,
                                       const DecomposeOptions& opts)
{
    return singular_impl(F, path, qv, &levels, eps, t_index, opts);
}

DecompositionReport decompose_singular(const FunctionalSpec& F, const SamplePath& path, const QVPath& qv, double eps,
                                       std::size_t t_index, const DecomposeOptions& opts)
{
    return singular_impl(F, path, qv, nullptr, eps, t_index, opts);
}

DecompositionReport decompose_young(const FunctionalSpec& F, const SamplePath& path, const QVPath& qv,
                                    const LevelGrid& levels, double eps, std::size_t t_index,
                                    const DecomposeOptions& opts)
{
    check_t_index(path, t_index);
    const LocalTimeField field = local_time_occupation(path, qv, levels, eps, time_options(t_index, opts));
    return young_impl(F, path, field, t_index);
}

DecompositionReport decompose_stable(const FunctionalSpec& F, const SamplePath& path, const LevelGrid& levels,
                                     double eps, std::size_t t_index, const VariationParams& params,
                                     const DecomposeOptions& opts)
{
    check_stable_orders(params.a, params.b, path.beta);
    check_t_index(path, t_index);
    const LocalTimeField field = path.beta < 2.0
                                     ? local_time_time_weighted(path, levels, eps, time_options(t_index, opts))
                                     : local_time_occupation(path, quadratic_variation(path), levels, eps,
                                                             time_options(t_index, opts));
    DecompositionReport r = young_impl(F, path, field, t_index);
    r.formula = Formula::stable_ab;
    r.params = params;
    return r;
}

ResidualStats residual_stats(const std::vector<DecompositionReport>& reports, std::size_t n_failed,
                             std::size_t n_excluded)
{
    if (reports.empty())
        throw estimation_failed("no usable paths to aggregate");
    ResidualStats s;
    s.n_paths = reports.size();
    s.n_failed = n_failed;
    s.n_excluded = n_excluded;
    s.coverage = static_cast<double>(reports.size()) / static_cast<double>(reports.size() + n_failed + n_excluded);
    std::vector<double> a;
    a.reserve(reports.size());
    double sum_lhs = 0.0, sum_signed = 0.0, sum_abs = 0.0;
    for (const auto& r : reports) {
        a.push_back(std::abs(r.residual));
        sum_abs += std::abs(r.residual);
        sum_signed += r.residual;
        sum_lhs += std::abs(r.lhs);
    }
    const double n = static_cast<double>(a.size());
    std::sort(a.begin(), a.end());
    s.mean_abs = sum_abs / n;
    s.signed_mean = sum_signed / n;
    s.median_abs = a.size() % 2 ? a[a.size() / 2] : 0.5 * (a[a.size() / 2 - 1] + a[a.size() / 2]);
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * n));
    s.p95_abs = a[std::max<std::size_t>(rank, 1) - 1];
    s.normalizer = sum_lhs / n;
    s.relative = s.normalizer > 0.0 ? s.mean_abs / s.normalizer : s.mean_abs;
    return s;
}

SamplePath simulate_process(const ProcessSpec& spec, std::size_t n_steps, std::uint64_t seed)
{
    switch (spec.kind) {
    case ProcessKind::brownian: return simulate_brownian(n_steps, spec.T, spec.z, seed);
    case ProcessKind::symmetric_stable: return simulate_symmetric_stable(spec.beta, n_steps, spec.T, seed, spec.z);
    case ProcessKind::euler_sde: {
        const double mu = spec.mu, sigma = spec.sigma, theta = spec.theta;
        if (spec.preset == "gbm")
            return simulate_euler_sde([mu](double x) { return mu * x; }, [sigma](double x) { return sigma * x; },
                                      n_steps, spec.T, spec.z, seed);
        if (spec.preset == "ou")
            return simulate_euler_sde([theta](double x) { return -theta * x; }, [sigma](double) { return sigma; },
                                      n_steps, spec.T, spec.z, seed);
        if (spec.preset == "unit")
            return simulate_euler_sde([](double) { return 0.0; }, [](double) { return 1.0; }, n_steps, spec.T,
                                      spec.z, seed);
        throw std::invalid_argument("unknown euler preset '" + spec.preset + "'");
    }
    }
    throw std::invalid_argument("unknown process kind");
}

std::size_t worker_count(std::size_t requested)
{
    if (requested > 0)
        return requested;
    if (const char* env = std::getenv("PATHFLOW_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
            return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, std::size_t threads)
{
    const std::size_t nw = std::min(worker_count(threads), n);
    if (nw <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr fatal;
    std::mutex m;
    const auto worker = [&] {
        for (std::size_t i = next++; i < n && !stop; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(m);
                if (!fatal)
                    fatal = std::current_exception();
                stop = true;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < nw; ++w)
        pool.emplace_back(worker);
    for (auto& th : pool)
        th.join();
    if (fatal)
        std::rethrow_exception(fatal);
}

namespace {

PathOutcome run_path(const EnsembleConfig& cfg, const FunctionalSpec& F, const MollifiedFunctional* M,
                     const SamplePath& path)
{
    PathOutcome out;
    out.seed = path.seed;
    try {
        const QVPath qv = quadratic_variation(path);
        const double eps = bandwidth(path.T, path.n_steps, cfg.eps_c, cfg.eps_exponent);
        std::size_t t = path.n_steps;
        if (cfg.t_end)
            t = std::min(t, static_cast<std::size_t>(std::floor(*cfg.t_end / path.dt() + 1e-9)));
        if (cfg.stop)
            t = std::min(t, default_t_index(path));
        const auto level_grid = [&] {
            return make_level_grid(std::span<const double>(path.values.data(), t + 1), eps, cfg.decompose.per_eps,
                                   cfg.decompose.margin_eps, cfg.decompose.max_levels);
        };
        switch (cfg.formula) {
        case Formula::smooth_c12: out.report = decompose_smooth(*M, path, qv, t, cfg.decompose); break;
        case Formula::singular_curve: out.report = decompose_singular(F, path, qv, eps, t, cfg.decompose); break;
        case Formula::young_pq: out.report = decompose_young(F, path, qv, level_grid(), eps, t, cfg.decompose); break;
        case Formula::stable_ab:
            out.report = decompose_stable(F, path, level_grid(), eps, t, cfg.params, cfg.decompose);
            break;
        }
        out.report.meta.eps = eps;
        out.ok = true;
        out.excluded = cfg.condition_positive_value && !(out.report.value_end > 0.0);
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const unsupported_capability&) {
        throw;
    } catch (const std::exception& e) {
        out.ok = false;
        out.error = e.what();
    }
    return out;
}

LadderLevel aggregate(const EnsembleConfig& cfg, std::size_t n, std::vector<PathOutcome> paths)
{
    LadderLevel lv;
    lv.n_steps = n;
    lv.eps = bandwidth(cfg.process.T, n, cfg.eps_c, cfg.eps_exponent);
    std::vector<DecompositionReport> used;
    std::size_t failed = 0, excluded = 0;
    for (const auto& p : paths) {
        if (!p.ok)
            ++failed;
        else if (p.excluded)
            ++excluded;
        else
            used.push_back(p.report);
    }
    if (static_cast<double>(failed) > cfg.max_failure_rate * static_cast<double>(paths.size()))
        throw estimation_failed("ensemble aborted: " + std::to_string(failed) + " of " + std::to_string(paths.size())
                                + " paths failed");
    lv.stats = residual_stats(used, failed, excluded);
    lv.paths = std::move(paths);
    return lv;
}

}  // namespace

std::vector<LadderLevel> refinement_ladder(const EnsembleConfig& cfg, const std::vector<std::size_t>& n_levels)
{
    if (n_levels.empty())
        throw std::invalid_argument("ladder needs at least one level");
    if (cfg.n_paths == 0)
        throw std::invalid_argument("n_paths must be positive");
    if (!cfg.functional)
        throw std::invalid_argument("ensemble needs a functional");
    const std::size_t finest = *std::max_element(n_levels.begin(), n_levels.end());
    for (std::size_t n : n_levels)
        if (n == 0 || finest % n != 0)
            throw std::invalid_argument("ladder levels must divide the finest level");

    const FunctionalSpec F = cfg.functional();
    std::optional<MollifiedFunctional> M;
    if (cfg.formula == Formula::smooth_c12)
        M.emplace(F, cfg.mollification_n, cfg.quad_nodes);
    if (cfg.formula == Formula::stable_ab) {
        const double beta = cfg.process.kind == ProcessKind::symmetric_stable ? cfg.process.beta : 2.0;
        check_stable_orders(cfg.params.a, cfg.params.b, beta);
    }

    std::vector<std::vector<PathOutcome>> results(cfg.n_paths, std::vector<PathOutcome>(n_levels.size()));
    parallel_for(
        cfg.n_paths,
        [&](std::size_t p) {
            const std::uint64_t seed = cfg.seed0 + p;
            SamplePath fine;
            try {
                fine = simulate_process(cfg.process, finest, seed);
            } catch (const simulation_diverged& e) {
                for (auto& o : results[p]) {
                    o.seed = seed;
                    o.error = e.what();
                }
                return;
            }
            for (std::size_t l = 0; l < n_levels.size(); ++l) {
                const std::size_t f = finest / n_levels[l];
                results[p][l] = f == 1 ? run_path(cfg, F, M ? &*M : nullptr, fine)
                                       : run_path(cfg, F, M ? &*M : nullptr, coarsen(fine, f));
            }
        },
        cfg.threads);

    std::vector<LadderLevel> out;
    for (std::size_t l = 0; l < n_levels.size(); ++l) {
        std::vector<PathOutcome> col;
        col.reserve(cfg.n_paths);
        for (auto& row : results)
            col.push_back(std::move(row[l]));
        out.push_back(aggregate(cfg, n_levels[l], std::move(col)));
    }
    return out;
}

LadderLevel ensemble(const EnsembleConfig& cfg) { return refinement_ladder(cfg, {cfg.n_steps}).front(); }

bool ladder_non_increasing(const std::vector<LadderLevel>& ladder, std::size_t max_inversions, double allowance)
{
    std::vector<const LadderLevel*> lv;
    for (const auto& l : ladder)
        lv.push_back(&l);
    std::sort(lv.begin(), lv.end(), [](auto* a, auto* b) { return a->n_steps < b->n_steps; });
    std::size_t inversions = 0;
    for (std::size_t i = 1; i < lv.size(); ++i) {
        const double prev = lv[i - 1]->stats.median_abs, cur = lv[i]->stats.median_abs;
        if (cur > prev) {
            if (cur > (1.0 + allowance) * prev)
                return false;
            ++inversions;
        }
    }
    return inversions <= max_inversions;
}

}  // namespace pathflow
