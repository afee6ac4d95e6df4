#include "pathflow/variation.hpp"

#include "pathflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pathflow {

bool VariationParams::young_condition() const
{
    return alpha / p + 1.0 / p_tilde > 1.0 && (1.0 - alpha) / q + 1.0 / q_tilde > 1.0;
}

bool VariationParams::header_condition() const
{
    return 1.0 / p + 1.0 / (2.0 + delta) > 1.0 && alpha + 1.0 / p_tilde > 1.0
           && (1.0 - alpha) / (2.0 + delta) + 1.0 / q_tilde > 1.0;
}

bool VariationParams::stable_condition() const
{
    return stable_orders_admissible(a, b, beta) && alpha1 > 2.0 / (beta - 1.0)
           && alpha2 > 2.0 * beta / (beta - 1.0);
}

bool stable_orders_admissible(double a, double b, double beta)
{
    if (!(beta > 1.0 && beta <= 2.0))
        return false;
    return a >= 1.0 && a < 2.0 * beta / (beta + 1.0) && b >= 1.0 && b < 2.0 / (3.0 - beta) && a <= b;
}

void check_stable_orders(double a, double b, double beta)
{
    if (!(beta > 1.0 && beta <= 2.0))
        throw std::invalid_argument("violated 1 < beta <= 2");
    if (!(a >= 1.0))
        throw std::invalid_argument("violated 1 <= a");
    if (!(a < 2.0 * beta / (beta + 1.0)))
        throw std::invalid_argument("violated a < 2*beta/(beta+1)");
    if (!(b >= 1.0))
        throw std::invalid_argument("violated 1 <= b");
    if (!(b < 2.0 / (3.0 - beta)))
        throw std::invalid_argument("violated b < 2/(3-beta)");
    if (!(a <= b))
        throw std::invalid_argument("violated a <= b");
}

std::string to_string(VariationMethod m)
{
    switch (m) {
    case VariationMethod::grid_sum: return "grid_sum";
    case VariationMethod::dp_exact: return "dp_exact";
    case VariationMethod::dyadic_sup: return "dyadic_sup";
    }
    return "unknown";
}

namespace {

// |d|^p with cheap paths for the common orders.
class Power {
public:
    explicit Power(double p) : p_(p)
    {
        if (p == 1.0) kind_ = 1;
        else if (p == 2.0) kind_ = 2;
        else if (p == 3.0) kind_ = 3;
        else if (p == 1.5) kind_ = 4;
        else if (p == 2.5) kind_ = 5;
    }
    double operator()(double d) const
    {
        d = std::abs(d);
        switch (kind_) {
        case 1: return d;
        case 2: return d * d;
        case 3: return d * d * d;
        case 4: return d * std::sqrt(d);
        case 5: return d * d * std::sqrt(d);
        default: return std::pow(d, p_);
        }
    }

private:
    double p_;
    int kind_ = 0;
};

void check_order(double p)
{
    if (!(p >= 1.0))
        throw std::invalid_argument("variation order must be >= 1");
}

template <class Pow>
double dp_sup(std::span<const double> s, const Pow& pw)
{
    const std::size_t n = s.size();
    if (n < 2)
        return 0.0;
    std::vector<double> best(n, 0.0);
    for (std::size_t j = 1; j < n; ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < j; ++i)
            m = std::max(m, best[i] + pw(s[j] - s[i]));
        best[j] = m;
    }
    return best[n - 1];
}

std::vector<double> extrema(std::span<const double> s)
{
    std::vector<double> r;
    r.reserve(s.size());
    for (double v : s) {
        if (!r.empty() && v == r.back())
            continue;
        if (r.size() >= 2 && (r.back() - r[r.size() - 2] > 0.0) == (v - r.back() > 0.0))
            r.back() = v;
        else
            r.push_back(v);
    }
    return r;
}

double total_variation(std::span<const double> s)
{
    double tv = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i)
        tv += std::abs(s[i] - s[i - 1]);
    return tv;
}

double pvar_fast(std::span<const double> s, double p)
{
    if (p == 1.0)
        return total_variation(s);
    const auto r = extrema(s);
    return std::pow(dp_sup(std::span<const double>(r), Power(p)), 1.0 / p);
}

double median_of(std::vector<double>& v)
{
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

double p_variation_grid(std::span<const double> seq, double p)
{
    check_order(p);
    if (seq.size() < 2)
        throw std::invalid_argument("p_variation_grid needs at least two entries");
    double s = 0.0;
    for (std::size_t i = 1; i < seq.size(); ++i)
        s += std::pow(std::abs(seq[i] - seq[i - 1]), p);
    return std::pow(s, 1.0 / p);
}

double p_variation_sup(std::span<const double> seq, double p, std::size_t max_n)
{
    check_order(p);
    if (seq.size() > max_n)
        throw too_large("sequence longer than max_n; subsample before calling p_variation_sup");
    const auto pw = [p](double d) { return std::pow(std::abs(d), p); };
    return std::pow(dp_sup(seq, pw), 1.0 / p);
}

double p_variation_extrema(std::span<const double> seq, double p)
{
    check_order(p);
    return pvar_fast(seq, p);
}

std::vector<std::size_t> pair_support(std::size_t n, std::size_t budget)
{
    std::vector<std::size_t> idx;
    if (n == 0)
        return idx;
    const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    if (pairs <= static_cast<double>(budget)) {
        for (std::size_t i = 0; i < n; ++i)
            idx.push_back(i);
        return idx;
    }
    const auto k = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::floor(0.5 * (1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(budget))))));
    for (std::size_t m = 0; m < k; ++m) {
        const auto i = static_cast<std::size_t>(
            std::llround(static_cast<double>(m) * static_cast<double>(n - 1) / static_cast<double>(k - 1)));
        if (idx.empty() || i != idx.back())
            idx.push_back(i);
    }
    return idx;
}

Bivariation bivariation(const GridFunction2D& h, double p, double q, std::size_t pair_budget)
{
    check_order(p);
    check_order(q);
    h.validate();
    Bivariation out;
    const std::size_t nt = h.nt(), nx = h.nx();
    if (nt < 2 || nx < 2)
        throw std::invalid_argument("bivariation needs at least two points per axis");

    std::vector<double> cols(nt * nx);
    for (std::size_t i = 0; i < nt; ++i)
        for (std::size_t j = 0; j < nx; ++j)
            cols[j * nt + i] = h.at(i, j);
    const auto lv = pair_support(nx, pair_budget);
    out.sampled1 = lv.size() < nx;
    std::vector<double> seq(std::max(nt, nx));
    for (std::size_t a = 0; a < lv.size(); ++a)
        for (std::size_t b = a + 1; b < lv.size(); ++b) {
            const double* c1 = &cols[lv[a] * nt];
            const double* c2 = &cols[lv[b] * nt];
            for (std::size_t i = 0; i < nt; ++i)
                seq[i] = c1[i] - c2[i];
            out.norm1 = std::max(out.norm1, pvar_fast(std::span<const double>(seq.data(), nt), p));
        }

    const auto tv = pair_support(nt, pair_budget);
    out.sampled2 = tv.size() < nt;
    for (std::size_t a = 0; a < tv.size(); ++a)
        for (std::size_t b = a + 1; b < tv.size(); ++b) {
            const double* r1 = &h.values[tv[a] * nx];
            const double* r2 = &h.values[tv[b] * nx];
            for (std::size_t j = 0; j < nx; ++j)
                seq[j] = r1[j] - r2[j];
            out.norm2 = std::max(out.norm2, pvar_fast(std::span<const double>(seq.data(), nx), q));
        }
    return out;
}

double rv_sum(const GridFunction2D& h, double p, double q)
{
    const Power pw(p);
    double total = 0.0;
    for (std::size_t i = 1; i < h.nt(); ++i) {
        double inner = 0.0;
        for (std::size_t j = 1; j < h.nx(); ++j)
            inner += pw(h.rect(i, j));
        total += std::pow(inner, q / p);
    }
    return total;
}

double lv_sum(const GridFunction2D& h, double r, double s)
{
    const Power pw(r);
    std::vector<double> inner(h.nx(), 0.0);
    for (std::size_t i = 1; i < h.nt(); ++i)
        for (std::size_t j = 1; j < h.nx(); ++j)
            inner[j] += pw(h.rect(i, j));
    double total = 0.0;
    for (std::size_t j = 1; j < h.nx(); ++j)
        total += std::pow(inner[j], s / r);
    return total;
}

namespace {

template <class Sum>
double ladder_max(const GridFunction2D& h, Sum&& sum)
{
    h.validate();
    if (h.nt() < 2 || h.nx() < 2)
        throw std::invalid_argument("joint variation needs at least two points per axis");
    double best = 0.0;
    const std::size_t depth = ladder_depth(h);
    for (std::size_t k = 0; k < depth; ++k)
        best = std::max(best, sum(k == 0 ? h : coarsen(h, k)));
    return best;
}

}  // namespace

double joint_rv(const GridFunction2D& h, double p, double q)
{
    check_order(p);
    check_order(q);
    return std::pow(ladder_max(h, [&](const GridFunction2D& g) { return rv_sum(g, p, q); }), 1.0 / q);
}

double joint_lv(const GridFunction2D& h, double r, double s)
{
    check_order(r);
    check_order(s);
    return std::pow(ladder_max(h, [&](const GridFunction2D& g) { return lv_sum(g, r, s); }), 1.0 / s);
}

double holder_control_constant(const GridFunction2D& h, double p_tilde, double q_tilde)
{
    h.validate();
    if (h.nt() < 2 || h.nx() < 2)
        throw std::invalid_argument("Hoelder control needs at least two points per axis");
    double c = 0.0;
    for (std::size_t i = 1; i < h.nt(); ++i) {
        const double st = std::pow(h.t[i] - h.t[i - 1], 1.0 / p_tilde);
        for (std::size_t j = 1; j < h.nx(); ++j)
            c = std::max(c, std::abs(h.rect(i, j)) / (st * std::pow(h.x[j] - h.x[j - 1], 1.0 / q_tilde)));
    }
    return c;
}

InterpolationResult interpolation_check(const GridFunction2D& h, double a, double b, double a_prime,
                                        std::size_t rectangle_budget)
{
    check_order(a);
    check_order(b);
    if (!(a < a_prime))
        throw std::invalid_argument("interpolation needs a < a_prime");
    const double b_prime = a_prime / a * b;
    InterpolationResult out;
    const double lv_hi = ladder_max(h, [&](const GridFunction2D& g) { return lv_sum(g, a_prime, b_prime); });
    const double lv_lo = ladder_max(h, [&](const GridFunction2D& g) { return lv_sum(g, a, b); });
    out.lhs = std::pow(lv_hi, 1.0 / b_prime);

    const std::size_t nt = h.nt(), nx = h.nx();
    const auto spread = [&](std::size_t i1, std::size_t i2) {
        double mn = 0.0, mx = 0.0;
        for (std::size_t j = 0; j < nx; ++j) {
            const double d = h.at(i2, j) - h.at(i1, j);
            if (j == 0 || d < mn) mn = d;
            if (j == 0 || d > mx) mx = d;
        }
        return mx - mn;
    };
    double sup = 0.0;
    const double all = 0.5 * static_cast<double>(nt) * static_cast<double>(nt - 1) * static_cast<double>(nx);
    out.all_rectangles = all <= static_cast<double>(rectangle_budget);
    if (out.all_rectangles) {
        for (std::size_t i1 = 0; i1 < nt; ++i1)
            for (std::size_t i2 = i1 + 1; i2 < nt; ++i2)
                sup = std::max(sup, spread(i1, i2));
    } else {
        // Every cell of every ladder member, plus a strided sample of the remaining time pairs.
        std::size_t f = 1;
        for (;;) {
            const auto ti = coarse_indices(nt, f);
            for (std::size_t m = 1; m < ti.size(); ++m)
                sup = std::max(sup, spread(ti[m - 1], ti[m]));
            if (ti.size() <= 2)
                break;
            f *= 2;
        }
        const auto sample = pair_support(nt, std::max<std::size_t>(1, rectangle_budget / std::max<std::size_t>(nx, 1)));
        for (std::size_t u = 0; u < sample.size(); ++u)
            for (std::size_t v = u + 1; v < sample.size(); ++v)
                sup = std::max(sup, spread(sample[u], sample[v]));
    }
    out.sup_increment = sup;
    out.rhs = std::pow(sup, (a_prime - a) / a_prime) * std::pow(lv_lo, 1.0 / b_prime);
    return out;
}

HolderFit holder_exponent_fit_detail(const LocalTimeField& field, HolderAxis axis)
{
    HolderFit fit;
    const std::size_t nc = field.n_cols();
    const std::size_t nt = field.n_times();
    if (nt < 2 || nc < 3)
        throw estimation_failed("field too small for an exponent fit");
    const double dx = field.levels.spacing();
    std::vector<double> buf;
    std::vector<double> lx, ly;
    if (axis == HolderAxis::space) {
        const auto last = field.row(nt - 1);
        const auto base = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(4.0 * field.eps / dx)));
        for (std::size_t k = 0; k < 4; ++k) {
            const std::size_t h = base << k;
            if (h >= nc)
                break;
            buf.clear();
            for (std::size_t j = 0; j + h < nc; ++j)
                if (last[j] > 0.0 && last[j + h] > 0.0)
                    buf.push_back(std::abs(last[j + h] - last[j]));
            if (buf.empty())
                break;
            const double med = median_of(buf);
            if (!(med > 0.0))
                break;
            fit.spacings.push_back(static_cast<double>(h) * dx);
            fit.medians.push_back(med);
        }
    } else {
        const auto h = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(field.eps / dx - 1e-9)));
        const std::size_t steps = nt - 1;
        const std::size_t tau0 = std::max<std::size_t>(1, steps / 64);
        for (std::size_t k = 0; k < 4; ++k) {
            const std::size_t tau = tau0 << k;
            if (tau > steps || h >= nc)
                break;
            buf.clear();
            for (std::size_t i = 0; i + tau < nt; ++i) {
                const auto r0 = field.row(i);
                const auto r1 = field.row(i + tau);
                for (std::size_t j = 0; j + h < nc; ++j) {
                    const double w0 = r1[j] - r0[j];
                    const double w1 = r1[j + h] - r0[j + h];
                    if (w0 > 0.0 && w1 > 0.0)
                        buf.push_back(std::abs(w1 - w0));
                }
            }
            if (buf.empty())
                break;
            const double med = median_of(buf);
            if (!(med > 0.0))
                break;
            fit.spacings.push_back(static_cast<double>(field.time_indices[tau] - field.time_indices[0]) * field.dt);
            fit.medians.push_back(med);
        }
    }
    if (fit.spacings.size() < 2)
        throw estimation_failed("not enough nonzero increments for an exponent fit");
    for (std::size_t k = 0; k < fit.spacings.size(); ++k) {
        lx.push_back(std::log(fit.spacings[k]));
        ly.push_back(std::log(fit.medians[k]));
    }
    fit.exponent = ls_slope(lx, ly);
    return fit;
}

double holder_exponent_fit(const LocalTimeField& field, HolderAxis axis)
{
    return holder_exponent_fit_detail(field, axis).exponent;
}

}  // namespace pathflow
