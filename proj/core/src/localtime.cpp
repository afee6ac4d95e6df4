#include "pathflow/localtime.hpp"

#include "binary_io.hpp"
#include "pathflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace pathflow {

double LocalTimeField::at_level(std::size_t i, double x) const
{
    const double p = (x - levels.lo) / levels.spacing();
    if (!(p >= 0.0) || p > static_cast<double>(levels.n_levels))
        return 0.0;
    const auto j = std::min(static_cast<std::size_t>(p), levels.n_levels - 1);
    const double f = p - static_cast<double>(j);
    return (1.0 - f) * at(i, j) + f * at(i, j + 1);
}

double bandwidth(double T, std::size_t n_steps, double c, double exponent)
{
    if (n_steps == 0 || !(T > 0.0) || !(c > 0.0))
        throw std::invalid_argument("bandwidth needs positive T, n_steps and c");
    return c * std::pow(T / static_cast<double>(n_steps), exponent);
}

std::vector<std::size_t> default_time_indices(std::size_t upto, std::size_t max_points)
{
    if (max_points == 0)
        throw std::invalid_argument("max_points must be positive");
    const std::size_t stride = upto <= max_points ? 1 : (upto + max_points - 1) / max_points;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < upto; i += stride)
        idx.push_back(i);
    idx.push_back(upto);
    return idx;
}

LevelGrid make_level_grid(std::span<const double> values, double eps, std::size_t per_eps, double margin_eps,
                          std::size_t max_levels)
{
    if (values.empty() || !(eps > 0.0) || per_eps == 0)
        throw std::invalid_argument("level grid needs values, eps > 0 and per_eps >= 1");
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    const double dx = eps / static_cast<double>(per_eps);
    const double lo_k = std::floor((*mn - margin_eps * eps) / dx);
    const double hi_k = std::ceil((*mx + margin_eps * eps) / dx);
    const double n = hi_k - lo_k;
    if (!std::isfinite(n) || n > static_cast<double>(max_levels))
        throw grid_exhausted("level grid would need " + format_real(n) + " levels");
    LevelGrid g;
    g.lo = lo_k * dx;
    g.hi = hi_k * dx;
    g.n_levels = static_cast<std::size_t>(std::max(1.0, n));
    return g;
}

namespace {

std::vector<std::size_t> resolve_times(const LocalTimeOptions& opts, std::size_t n_steps)
{
    const std::size_t upto = std::min(opts.upto, n_steps);
    if (opts.time_indices.empty())
        return default_time_indices(upto, opts.max_time_points);
    const auto& t = opts.time_indices;
    if (t.front() != 0 || t.back() > upto || !std::is_sorted(t.begin(), t.end())
        || std::adjacent_find(t.begin(), t.end()) != t.end())
        throw std::invalid_argument("time_indices must start at 0, increase strictly and stay within the path");
    return t;
}

void check_bandwidth(const LevelGrid& levels, double eps)
{
    if (!(levels.hi > levels.lo) || levels.n_levels == 0)
        throw std::invalid_argument("level grid must satisfy lo < hi");
    if (eps < levels.spacing() * (1.0 - 1e-12))
        throw std::invalid_argument("bandwidth smaller than the level spacing");
}

// Half-width in index units, snapped to an integer when it is one up to rounding.
double index_radius(const LevelGrid& levels, double eps)
{
    const double r = eps / levels.spacing();
    const double rr = std::round(r);
    return std::abs(r - rr) <= 1e-9 * rr ? rr : r;
}

}  // namespace

LocalTimeField occupation_field(std::span<const double> values, std::span<const double> weights,
                                const LevelGrid& levels, double eps, std::vector<std::size_t> time_indices,
                                LocalTimeConvention convention, double dt)
{
    check_bandwidth(levels, eps);
    LocalTimeField f;
    f.levels = levels;
    f.time_indices = std::move(time_indices);
    f.convention = convention;
    f.eps = eps;
    f.dt = dt;
    const std::size_t cols = levels.size();
    f.values.assign(f.time_indices.size() * cols, 0.0);

    const double dx = levels.spacing();
    const double r = index_radius(levels, eps);
    const double top = static_cast<double>(levels.n_levels);
    const double scale = 1.0 / (2.0 * eps);
    std::vector<double> cur(cols, 0.0);
    std::size_t row = 1;
    for (std::size_t k = 1; k <= f.time_indices.back(); ++k) {
        const double w = weights[k] * scale;
        const double u = (values[k - 1] - levels.lo) / dx;
        const double a = std::max(std::ceil(u - r), 0.0);
        const double b = std::min(std::floor(u + r), top);
        if (w != 0.0 && a <= b)
            for (auto j = static_cast<std::size_t>(a); j <= static_cast<std::size_t>(b); ++j)
                cur[j] += w;
        if (row < f.time_indices.size() && f.time_indices[row] == k) {
            std::copy(cur.begin(), cur.end(), f.values.begin() + static_cast<std::ptrdiff_t>(row * cols));
            ++row;
        }
    }
    return f;
}

LocalTimeField local_time_occupation(const SamplePath& path, const QVPath& qv, const LevelGrid& levels, double eps,
                                     const LocalTimeOptions& opts)
{
    if (qv.cumulative.size() != path.values.size())
        throw std::invalid_argument("quadratic variation does not belong to the path");
    std::vector<double> w(path.values.size(), 0.0);
    for (std::size_t k = 1; k < w.size(); ++k)
        w[k] = qv.cumulative[k] - qv.cumulative[k - 1];
    return occupation_field(path.values, w, levels, eps, resolve_times(opts, path.n_steps),
                            LocalTimeConvention::qv_weighted, path.dt());
}

LocalTimeField local_time_time_weighted(const SamplePath& path, const LevelGrid& levels, double eps,
                                        const LocalTimeOptions& opts)
{
    std::vector<double> w(path.values.size(), path.dt());
    w[0] = 0.0;
    return occupation_field(path.values, w, levels, eps, resolve_times(opts, path.n_steps),
                            LocalTimeConvention::time_weighted, path.dt());
}

LocalTimeField local_time_downcrossings(const SamplePath& path, const LevelGrid& levels, double eps,
                                        const LocalTimeOptions& opts)
{
    check_bandwidth(levels, eps);
    LocalTimeField f;
    f.levels = levels;
    f.time_indices = resolve_times(opts, path.n_steps);
    f.convention = LocalTimeConvention::qv_weighted;
    f.eps = eps;
    f.dt = path.dt();
    const std::size_t cols = levels.size();
    f.values.assign(f.time_indices.size() * cols, 0.0);

    const double dx = levels.spacing();
    const auto clamp_index = [&](double v) {
        return static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(levels.n_levels)));
    };
    std::vector<unsigned char> armed(cols, 0);
    std::vector<std::size_t> count(cols, 0);
    const auto arm_up_to = [&](double lo_v, double hi_v) {
        const std::size_t a = clamp_index(std::ceil((lo_v - eps - levels.lo) / dx) - 1.0);
        const std::size_t b = clamp_index(std::floor((hi_v - eps - levels.lo) / dx) + 1.0);
        for (std::size_t j = a; j <= b; ++j)
            if (levels.level(j) + eps <= hi_v)
                armed[j] = 1;
    };
    const auto& x = path.values;
    arm_up_to(-std::numeric_limits<double>::max() / 4, x[0]);
    std::size_t row = 1;
    for (std::size_t k = 1; k <= f.time_indices.back(); ++k) {
        const double prev = x[k - 1];
        const double v = x[k];
        if (v > prev) {
            arm_up_to(prev, v);
        } else if (v < prev) {
            const std::size_t a = clamp_index(std::ceil((v - levels.lo) / dx) - 1.0);
            const std::size_t b = clamp_index(std::floor((prev - levels.lo) / dx) + 1.0);
            for (std::size_t j = a; j <= b; ++j)
                if (armed[j] && levels.level(j) >= v) {
                    armed[j] = 0;
                    ++count[j];
                }
        }
        if (row < f.time_indices.size() && f.time_indices[row] == k) {
            for (std::size_t j = 0; j < cols; ++j)
                f.values[row * cols + j] = 2.0 * eps * static_cast<double>(count[j]);
            ++row;
        }
    }
    return f;
}

double occupation_check(const LocalTimeField& field, const std::function<double(double)>& f, const SamplePath& path,
                        const QVPath& qv)
{
    const std::size_t last = field.time_indices.back();
    double lhs = 0.0;
    for (std::size_t k = 1; k <= last; ++k) {
        const double w = field.convention == LocalTimeConvention::qv_weighted
                             ? qv.cumulative[k] - qv.cumulative[k - 1]
                             : path.dt();
        lhs += f(path.values[k - 1]) * w;
    }
    double rhs = 0.0;
    const std::size_t i = field.n_times() - 1;
    for (std::size_t j = 0; j < field.n_cols(); ++j) {
        const double l = field.at(i, j);
        if (l != 0.0)
            rhs += l * f(field.levels.level(j));
    }
    rhs *= field.levels.spacing();
    return std::abs(lhs - rhs) / (1.0 + std::abs(lhs));
}

LocalTimeField shifted_local_time(const SamplePath& path, std::span<const double> curve, const LevelGrid& levels,
                                  double eps, const LocalTimeOptions& opts, double curve_tv_bound)
{
    if (curve.size() != path.values.size())
        throw std::invalid_argument("curve length differs from the path length");
    const std::size_t n = path.values.size();
    std::vector<double> d(n), w(n, 0.0);
    double qv_d = 0.0, qv_x = 0.0, tv = 0.0;
    auto times = resolve_times(opts, path.n_steps);
    const std::size_t last = times.back();
    for (std::size_t i = 0; i < n; ++i)
        d[i] = path.values[i] - curve[i];
    for (std::size_t k = 1; k <= last; ++k) {
        const double dd = d[k] - d[k - 1];
        const double dxk = path.values[k] - path.values[k - 1];
        w[k] = dd * dd;
        qv_d += w[k];
        qv_x += dxk * dxk;
        tv += std::abs(curve[k] - curve[k - 1]);
    }
    LocalTimeField f = occupation_field(d, w, levels, eps, std::move(times), LocalTimeConvention::qv_weighted,
                                        path.dt());
    f.qv_discrepancy = qv_x > 0.0 ? std::abs(qv_d - qv_x) / qv_x : std::abs(qv_d);
    f.curve_tv_exceeded = tv > curve_tv_bound;
    return f;
}

void write_csv(std::ostream& out, const LocalTimeField& field)
{
    out << "t_index,level,value\r\n";
    for (std::size_t i = 0; i < field.n_times(); ++i)
        for (std::size_t j = 0; j < field.n_cols(); ++j)
            out << field.time_indices[i] << ',' << format_real(field.levels.level(j)) << ','
                << format_real(field.at(i, j)) << "\r\n";
}

void write_binary(std::ostream& out, const LocalTimeField& field)
{
    detail::put_magic(out, "PFL2");
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(field.convention));
    detail::put<double>(out, field.eps);
    detail::put<double>(out, field.dt);
    detail::put<double>(out, field.levels.lo);
    detail::put<double>(out, field.levels.hi);
    detail::put<std::uint64_t>(out, field.levels.n_levels);
    detail::put<std::uint64_t>(out, field.n_times());
    for (std::size_t t : field.time_indices)
        detail::put<std::uint64_t>(out, t);
    for (double v : field.values)
        detail::put<double>(out, v);
}

LocalTimeField read_local_time_binary(std::istream& in)
{
    detail::expect_magic(in, "PFL2");
    LocalTimeField f;
    const auto conv = detail::get<std::uint32_t>(in);
    if (conv > 1)
        throw std::runtime_error("PFL2: unknown convention");
    f.convention = static_cast<LocalTimeConvention>(conv);
    f.eps = detail::get<double>(in);
    f.dt = detail::get<double>(in);
    f.levels.lo = detail::get<double>(in);
    f.levels.hi = detail::get<double>(in);
    f.levels.n_levels = detail::get<std::uint64_t>(in);
    const auto nt = detail::get<std::uint64_t>(in);
    f.time_indices.resize(nt);
    for (auto& t : f.time_indices)
        t = detail::get<std::uint64_t>(in);
    f.values.resize(nt * f.levels.size());
    for (double& v : f.values)
        v = detail::get<double>(in);
    return f;
}

}  // namespace pathflow
