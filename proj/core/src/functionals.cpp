#include "pathflow/functionals.hpp"

#include "pathflow/errors.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pathflow {

double FunctionalState::weak(double) const { throw unsupported_capability("functional has no weak derivative"); }
double FunctionalState::horizontal(double) const
{
    throw unsupported_capability("functional has no horizontal derivative");
}
double FunctionalState::curve(double) const { throw unsupported_capability("functional has no singular curve"); }
double FunctionalState::jump(double) const { throw unsupported_capability("functional has no derivative jump"); }
double FunctionalState::second_left(double) const
{
    throw unsupported_capability("functional has no second left derivative");
}

FunctionalSpec::FunctionalSpec(std::string name, Capabilities caps, Factory factory)
    : name_(std::move(name)), caps_(caps), factory_(std::move(factory))
{
}

std::unique_ptr<FunctionalState> FunctionalSpec::state_at(const PathSlice& s) const
{
    auto st = start(FunctionalContext::of(s.parent()));
    for (std::size_t i = 0; i < s.end_index(); ++i)
        st->push(s.read(i));
    return st;
}

double FunctionalSpec::eval(const PathSlice& s) const { return state_at(s)->value(s.read(s.end_index())); }
double FunctionalSpec::eval_at(const PathSlice& s, double x) const { return state_at(s)->value(x); }
double FunctionalSpec::weak_spatial_derivative(const PathSlice& s, double x) const { return state_at(s)->weak(x); }
double FunctionalSpec::horizontal_derivative(const PathSlice& s) const
{
    return state_at(s)->horizontal(s.read(s.end_index()));
}
double FunctionalSpec::singular_curve(const PathSlice& s) const { return state_at(s)->curve(s.read(s.end_index())); }
double FunctionalSpec::derivative_jump(const PathSlice& s) const { return state_at(s)->jump(s.read(s.end_index())); }
double FunctionalSpec::second_left_derivative(const PathSlice& s, double x) const
{
    return state_at(s)->second_left(x);
}

namespace {

template <class Derived>
class StateBase : public FunctionalState {
public:
    std::unique_ptr<FunctionalState> clone() const override
    {
        return std::make_unique<Derived>(static_cast<const Derived&>(*this));
    }
};

class IdentityState final : public StateBase<IdentityState> {
public:
    void push(double) override { ++k_; }
    double value(double x) const override { return x; }
    double weak(double) const override { return 1.0; }
    double horizontal(double) const override { return 0.0; }
    double second_left(double) const override { return 0.0; }
};

class SquareState final : public StateBase<SquareState> {
public:
    void push(double) override { ++k_; }
    double value(double x) const override { return x * x; }
    double weak(double x) const override { return 2.0 * x; }
    double horizontal(double) const override { return 0.0; }
    double second_left(double) const override { return 2.0; }
};

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPosInf = std::numeric_limits<double>::infinity();

// max(sup c, K) over the history; K = -inf gives the running maximum.
class MaxState final : public StateBase<MaxState> {
public:
    MaxState(double K, bool payoff) : K_(K), payoff_(payoff) {}
    void push(double v) override
    {
        hist_ = std::max(hist_, v);
        ++k_;
    }
    double value(double x) const override
    {
        const double m = std::max(hist_, x);
        return payoff_ ? std::max(m - K_, 0.0) : m;
    }
    double weak(double x) const override { return x > std::max(hist_, K_) ? 1.0 : 0.0; }
    double horizontal(double) const override { return 0.0; }
    double curve(double terminal) const override { return std::max({hist_, terminal, K_}); }
    double jump(double) const override { return 1.0; }
    double second_left(double) const override { return 0.0; }

private:
    double K_;
    bool payoff_;
    double hist_ = kNegInf;
};

class PartialLookbackState final : public StateBase<PartialLookbackState> {
public:
    explicit PartialLookbackState(double lambda) : lambda_(lambda) {}
    void push(double v) override
    {
        inf_ = std::min(inf_, v);
        ++k_;
    }
    double value(double x) const override { return std::max(x - lambda_ * std::min(inf_, x), 0.0); }
    double weak(double x) const override
    {
        if (x < inf_)
            return x <= 0.0 ? 1.0 - lambda_ : 0.0;
        return x > lambda_ * inf_ ? 1.0 : 0.0;
    }
    double horizontal(double) const override { return 0.0; }
    double curve(double terminal) const override { return lambda_ * std::min(inf_, terminal); }
    double jump(double) const override { return 1.0; }
    double second_left(double) const override { return 0.0; }

private:
    double lambda_;
    double inf_ = kPosInf;
};

class CylinderState final : public StateBase<CylinderState> {
public:
    CylinderState(std::shared_ptr<const CylinderPayoff> f, std::vector<std::size_t> idx)
        : f_(std::move(f)), idx_(std::move(idx)), coords_(idx_.size(), 0.0), grad_(idx_.size(), 0.0)
    {
    }
    void push(double v) override
    {
        for (std::size_t i = 0; i < idx_.size(); ++i)
            if (idx_[i] == k_)
                coords_[i] = v;
        ++k_;
    }
    // Coordinate i is frozen once its left-limit index lies in the history.
    bool active(std::size_t i) const { return idx_[i] >= k_; }
    void fill(double x) const
    {
        for (std::size_t i = 0; i < idx_.size(); ++i)
            if (active(i))
                coords_[i] = x;
    }
    double value(double x) const override
    {
        fill(x);
        return f_->f(coords_);
    }
    double weak(double x) const override
    {
        fill(x);
        f_->grad(coords_, grad_);
        double s = 0.0;
        for (std::size_t i = 0; i < idx_.size(); ++i)
            if (active(i))
                s += grad_[i];
        return s;
    }
    double horizontal(double) const override { return 0.0; }
    double second_left(double x) const override
    {
        fill(x);
        double s = 0.0;
        for (std::size_t i = 0; i < idx_.size(); ++i)
            for (std::size_t j = 0; j < idx_.size(); ++j)
                if (active(i) && active(j))
                    s += f_->hess(coords_, i, j);
        return s;
    }

private:
    std::shared_ptr<const CylinderPayoff> f_;
    std::vector<std::size_t> idx_;  // left-limit grid index of each cylinder time
    mutable std::vector<double> coords_;
    mutable std::vector<double> grad_;
};

struct FpsShared {
    Phi phi;
    double R;
    std::vector<double> y;
    double dy;
};

class FpsState final : public StateBase<FpsState> {
public:
    FpsState(std::shared_ptr<const FpsShared> sh, double dt)
        : sh_(std::move(sh)), dt_(dt), A_(sh_->y.size(), 0.0), C_(sh_->y.size(), 0.0)
    {
    }
    void push(double v) override
    {
        for (std::size_t m = 0; m < A_.size(); ++m)
            A_[m] += dt_ * sh_->phi(v, sh_->y[m]);
        dirty_ = true;
        ++k_;
    }
    double value(double x) const override
    {
        refresh();
        return integrate(A_, C_, x);
    }
    double weak(double x) const override { return interpolate(A_, x); }
    double horizontal(double x) const override
    {
        std::vector<double> g(A_.size()), c(A_.size());
        for (std::size_t m = 0; m < g.size(); ++m)
            g[m] = sh_->phi(x, sh_->y[m]);
        cumulate(g, c);
        return integrate(g, c, x);
    }

private:
    void refresh() const
    {
        if (dirty_) {
            cumulate(A_, C_);
            dirty_ = false;
        }
    }
    void cumulate(const std::vector<double>& g, std::vector<double>& c) const
    {
        c[0] = 0.0;
        for (std::size_t m = 1; m < g.size(); ++m)
            c[m] = c[m - 1] + 0.5 * sh_->dy * (g[m - 1] + g[m]);
    }
    double interpolate(const std::vector<double>& g, double x) const
    {
        const double p = (x + sh_->R) / sh_->dy;
        if (!(p >= 0.0) || p >= static_cast<double>(g.size() - 1))
            return 0.0;
        const auto m = static_cast<std::size_t>(p);
        const double f = p - static_cast<double>(m);
        return g[m] + f * (g[m + 1] - g[m]);
    }
    // Exact integral of the piecewise-linear interpolant over [-R, x].
    double integrate(const std::vector<double>& g, const std::vector<double>& c, double x) const
    {
        const double p = (x + sh_->R) / sh_->dy;
        if (!(p > 0.0))
            return 0.0;
        if (p >= static_cast<double>(g.size() - 1))
            return c.back();
        const auto m = static_cast<std::size_t>(p);
        const double f = p - static_cast<double>(m);
        const double gx = g[m] + f * (g[m + 1] - g[m]);
        return c[m] + 0.5 * f * sh_->dy * (g[m] + gx);
    }

    std::shared_ptr<const FpsShared> sh_;
    double dt_;
    std::vector<double> A_;
    mutable std::vector<double> C_;
    mutable bool dirty_ = false;
};

}  // namespace

FunctionalSpec make_identity()
{
    return {"identity", {true, true, false, false, true},
            [](const FunctionalContext&) { return std::make_unique<IdentityState>(); }};
}

FunctionalSpec make_square()
{
    return {"square", {true, true, false, false, true},
            [](const FunctionalContext&) { return std::make_unique<SquareState>(); }};
}

FunctionalSpec make_running_max()
{
    return {"running_max", {true, true, true, true, true},
            [](const FunctionalContext&) { return std::make_unique<MaxState>(kNegInf, false); }};
}

FunctionalSpec make_lookback_fixed(double K)
{
    if (!std::isfinite(K))
        throw std::invalid_argument("strike must be finite");
    return {"lookback_fixed", {true, true, true, true, true},
            [K](const FunctionalContext&) { return std::make_unique<MaxState>(K, true); }};
}

FunctionalSpec make_partial_lookback(double lambda)
{
    if (!(lambda > 1.0) || !std::isfinite(lambda))
        throw std::invalid_argument("lambda must be > 1");
    return {"partial_lookback", {true, true, true, true, true},
            [lambda](const FunctionalContext&) { return std::make_unique<PartialLookbackState>(lambda); }};
}

CylinderPayoff cylinder_sum_of_squares()
{
    return {[](std::span<const double> x) {
                double s = 0.0;
                for (double v : x) s += v * v;
                return s;
            },
            [](std::span<const double> x, std::span<double> g) {
                for (std::size_t i = 0; i < x.size(); ++i) g[i] = 2.0 * x[i];
            },
            [](std::span<const double>, std::size_t i, std::size_t j) { return i == j ? 2.0 : 0.0; }};
}

CylinderPayoff cylinder_product()
{
    const auto prod_except = [](std::span<const double> x, std::size_t a, std::size_t b) {
        double p = 1.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (i != a && i != b) p *= x[i];
        return p;
    };
    return {[](std::span<const double> x) {
                double p = 1.0;
                for (double v : x) p *= v;
                return p;
            },
            [prod_except](std::span<const double> x, std::span<double> g) {
                for (std::size_t i = 0; i < x.size(); ++i) g[i] = prod_except(x, i, i);
            },
            [prod_except](std::span<const double> x, std::size_t i, std::size_t j) {
                return i == j ? 0.0 : prod_except(x, i, j);
            }};
}

CylinderPayoff cylinder_sum_sin()
{
    return {[](std::span<const double> x) {
                double s = 0.0;
                for (double v : x) s += std::sin(v);
                return s;
            },
            [](std::span<const double> x, std::span<double> g) {
                for (std::size_t i = 0; i < x.size(); ++i) g[i] = std::cos(x[i]);
            },
            [](std::span<const double> x, std::size_t i, std::size_t j) { return i == j ? -std::sin(x[i]) : 0.0; }};
}

FunctionalSpec make_cylinder(CylinderPayoff f, std::vector<double> times)
{
    if (times.empty() || !std::is_sorted(times.begin(), times.end()) || !(times.front() > 0.0))
        throw std::invalid_argument("cylinder times must be positive and increasing");
    auto shared = std::make_shared<const CylinderPayoff>(std::move(f));
    return {"cylinder", {true, true, false, false, true},
            [shared, times](const FunctionalContext& ctx) {
                std::vector<std::size_t> idx;
                for (double t : times) {
                    if (t > ctx.T * (1.0 + 1e-12))
                        throw std::invalid_argument("cylinder time beyond the horizon");
                    const double m = std::ceil(t / ctx.dt - 1e-9);
                    idx.push_back(static_cast<std::size_t>(std::max(m, 1.0)) - 1);
                }
                return std::make_unique<CylinderState>(shared, std::move(idx));
            }};
}

FunctionalSpec make_fps(Phi phi, double R, std::size_t y_points)
{
    if (!(R > 0.0) || y_points < 3)
        throw std::invalid_argument("fps needs R > 0 and at least three y points");
    auto sh = std::make_shared<FpsShared>();
    sh->phi = std::move(phi);
    sh->R = R;
    sh->dy = 2.0 * R / static_cast<double>(y_points - 1);
    for (std::size_t m = 0; m < y_points; ++m)
        sh->y.push_back(-R + static_cast<double>(m) * sh->dy);
    std::shared_ptr<const FpsShared> csh = sh;
    return {"fps", {true, true, false, false, false},
            [csh](const FunctionalContext& ctx) { return std::make_unique<FpsState>(csh, ctx.dt); }};
}

double bump(double u)
{
    if (!(std::abs(u) < 1.0))
        return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

double gaussian_bump_phi(double a, double y) { return std::exp(-a * a - y * y) * bump(y / 4.0); }

double horizontal_derivative_fd(const FunctionalSpec& F, const PathSlice& s, std::span<const double> gammas)
{
    if (gammas.empty())
        throw std::invalid_argument("need at least one gamma");
    const SamplePath& p = s.parent();
    const double dt = p.dt();
    const auto base = F.state_at(s);
    const double x = s.read(s.end_index());
    const double f0 = base->value(x);
    std::vector<double> g, d;
    for (double gamma : gammas) {
        const double steps = std::round(gamma / dt);
        if (!(steps >= 1.0) || std::abs(steps * dt - gamma) > 1e-9 * gamma)
            throw std::invalid_argument("gamma must be a positive multiple of the time step");
        if (s.end_index() + static_cast<std::size_t>(steps) > p.n_steps)
            throw std::invalid_argument("flat extension past the horizon");
        auto st = base->clone();
        for (std::size_t k = 0; k < static_cast<std::size_t>(steps); ++k)
            st->push(x);
        g.push_back(gamma);
        d.push_back((st->value(x) - f0) / gamma);
    }
    // Neville extrapolation to gamma = 0.
    for (std::size_t m = 1; m < d.size(); ++m)
        for (std::size_t i = d.size() - 1; i >= m; --i) {
            d[i] = (g[i] * d[i - 1] - g[i - m] * d[i]) / (g[i] - g[i - m]);
            if (i == m)
                break;
        }
    return d.back();
}

double rho(double x)
{
    const double u = x - 1.0;
    if (!(std::abs(u) < 1.0))
        return 0.0;
    return kRhoNormalisation * std::exp(-1.0 / (1.0 - u * u));
}

double rho_prime(double x)
{
    const double u = x - 1.0;
    if (!(std::abs(u) < 1.0))
        return 0.0;
    const double q = 1.0 - u * u;
    return rho(x) * (-2.0 * u / (q * q));
}

double rho_second(double x)
{
    const double u = x - 1.0;
    if (!(std::abs(u) < 1.0))
        return 0.0;
    const double q = 1.0 - u * u;
    const double q2 = q * q;
    return rho(x) * (4.0 * u * u / (q2 * q2) - 2.0 / q2 - 8.0 * u * u / (q2 * q));
}

MollifierKernel mollifier_kernel(std::size_t nodes)
{
    if (nodes < 8)
        throw std::invalid_argument("mollifier quadrature needs at least 8 nodes");
    gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(nodes);
    if (!table)
        throw std::runtime_error("gauss-legendre table allocation failed");
    MollifierKernel k;
    std::vector<double> a(nodes);
    k.z.resize(nodes);
    for (std::size_t i = 0; i < nodes; ++i)
        gsl_integration_glfixed_point(0.0, 2.0, i, &k.z[i], &a[i], table);
    gsl_integration_glfixed_table_free(table);

    k.w.resize(nodes);
    double total = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
        k.w[i] = a[i] * rho(k.z[i]);
        total += k.w[i];
    }
    double m[5] = {0, 0, 0, 0, 0};
    for (std::size_t i = 0; i < nodes; ++i) {
        k.w[i] /= total;
        double zp = 1.0;
        for (double& mj : m) {
            mj += k.w[i] * zp;
            zp *= k.z[i];
        }
    }
    k.mean = m[1];

    // rho' weights: raw quadrature plus w (alpha + beta z) so the first two moments are exact.
    k.w1.resize(nodes);
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
        k.w1[i] = a[i] * rho_prime(k.z[i]);
        s0 += k.w1[i];
        s1 += k.w1[i] * k.z[i];
    }
    {
        const double r0 = -s0, r1 = -1.0 - s1;
        const double det = m[0] * m[2] - m[1] * m[1];
        const double alpha = (r0 * m[2] - m[1] * r1) / det;
        const double beta = (m[0] * r1 - m[1] * r0) / det;
        for (std::size_t i = 0; i < nodes; ++i)
            k.w1[i] += k.w[i] * (alpha + beta * k.z[i]);
    }

    // rho'' weights: correction w (alpha + beta z + gamma z^2) fixes three moments.
    k.w2.resize(nodes);
    double t[3] = {0, 0, 0};
    for (std::size_t i = 0; i < nodes; ++i) {
        k.w2[i] = a[i] * rho_second(k.z[i]);
        t[0] += k.w2[i];
        t[1] += k.w2[i] * k.z[i];
        t[2] += k.w2[i] * k.z[i] * k.z[i];
    }
    {
        const double r[3] = {-t[0], -t[1], 2.0 - t[2]};
        const double A[3][3] = {{m[0], m[1], m[2]}, {m[1], m[2], m[3]}, {m[2], m[3], m[4]}};
        const auto det3 = [](const double M[3][3]) {
            return M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
                   M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
                   M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
        };
        const double d = det3(A);
        double coef[3];
        for (int c = 0; c < 3; ++c) {
            double B[3][3];
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    B[i][j] = j == c ? r[i] : A[i][j];
            coef[c] = det3(B) / d;
        }
        for (std::size_t i = 0; i < nodes; ++i)
            k.w2[i] += k.w[i] * (coef[0] + k.z[i] * (coef[1] + k.z[i] * coef[2]));
    }
    return k;
}

MollifiedFunctional::MollifiedFunctional(FunctionalSpec base, std::size_t n, std::size_t quad_nodes)
    : base_(std::move(base)), n_(n), kernel_(mollifier_kernel(quad_nodes))
{
    if (n == 0)
        throw std::invalid_argument("mollification index must be positive");
}

double MollifiedFunctional::value(const FunctionalState& s, double x) const
{
    const double h = 1.0 / static_cast<double>(n_);
    double acc = 0.0;
    for (std::size_t i = 0; i < kernel_.z.size(); ++i)
        acc += kernel_.w[i] * s.value(x - kernel_.z[i] * h);
    return acc;
}

double MollifiedFunctional::first(const FunctionalState& s, double x) const
{
    const double n = static_cast<double>(n_);
    double acc = 0.0;
    if (base_.caps().weak) {
        for (std::size_t i = 0; i < kernel_.z.size(); ++i)
            acc += kernel_.w[i] * s.weak(x - kernel_.z[i] / n);
        return acc;
    }
    for (std::size_t i = 0; i < kernel_.z.size(); ++i)
        acc += kernel_.w1[i] * s.value(x - kernel_.z[i] / n);
    return n * acc;
}

double MollifiedFunctional::second(const FunctionalState& s, double x) const
{
    const double n = static_cast<double>(n_);
    double acc = 0.0;
    for (std::size_t i = 0; i < kernel_.z.size(); ++i)
        acc += kernel_.w2[i] * s.value(x - kernel_.z[i] / n);
    return n * n * acc;
}

double MollifiedFunctional::horizontal(const FunctionalState& s, double x) const
{
    if (!base_.caps().horizontal)
        throw unsupported_capability("base functional has no horizontal derivative");
    const double n = static_cast<double>(n_);
    double acc = 0.0;
    for (std::size_t i = 0; i < kernel_.z.size(); ++i)
        acc += kernel_.w[i] * s.horizontal(x - kernel_.z[i] / n);
    return acc;
}

double MollifiedFunctional::eval(const PathSlice& s) const
{
    return value(*base_.state_at(s), s.read(s.end_index()));
}

double MollifiedFunctional::eval_at(const PathSlice& s, double x) const { return value(*base_.state_at(s), x); }

MollifiedFunctional mollify(const FunctionalSpec& F, std::size_t n, std::size_t quad_nodes)
{
    return MollifiedFunctional(F, n, quad_nodes);
}

double mollified_vertical_derivative(const MollifiedFunctional& M, const PathSlice& s, double x, int order)
{
    const auto st = M.base().state_at(s);
    switch (order) {
    case 0: return M.value(*st, x);
    case 1: return M.first(*st, x);
    case 2: return M.second(*st, x);
    default: throw std::invalid_argument("derivative order must be 0, 1 or 2");
    }
}

double mollified_horizontal_derivative(const MollifiedFunctional& M, const PathSlice& s)
{
    return M.horizontal(*M.base().state_at(s), s.read(s.end_index()));
}

}  // namespace pathflow
