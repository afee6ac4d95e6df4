#pragma once

#include "pathflow/paths.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pathflow {

struct FunctionalContext {
    double dt = 1.0;
    double T = 1.0;
    std::size_t n_steps = 1;

    static FunctionalContext of(const SamplePath& p) { return {p.dt(), p.T, p.n_steps}; }
};

// Summary of c on [0, t_k) after k pushes; queries take the terminal value c(t_k) as an argument.
class FunctionalState {
public:
    virtual ~FunctionalState() = default;
    virtual std::unique_ptr<FunctionalState> clone() const = 0;
    virtual void push(double v) = 0;
    std::size_t index() const { return k_; }

    // F_t(^x c_t).
    virtual double value(double x) const = 0;
    // (grad^w_x F_t)(^x c_t), left-continuous representative.
    virtual double weak(double x) const;
    // grad^h of the terminal-modified functional at ^x c_t.
    virtual double horizontal(double x) const;
    // gamma_t(c_t) with c(t) = terminal.
    virtual double curve(double terminal) const;
    // grad_x F(gamma+) - grad_x F(gamma-).
    virtual double jump(double terminal) const;
    // grad^{-,2}_x F_t(^x c_t) off the singular curve.
    virtual double second_left(double x) const;

protected:
    std::size_t k_ = 0;
};

struct Capabilities {
    bool weak = false;
    bool horizontal = false;
    bool curve = false;
    bool jump = false;
    bool second_left = false;
};

class FunctionalSpec {
public:
    using Factory = std::function<std::unique_ptr<FunctionalState>(const FunctionalContext&)>;

    FunctionalSpec(std::string name, Capabilities caps, Factory factory);

    const std::string& name() const { return name_; }
    const Capabilities& caps() const { return caps_; }
    std::unique_ptr<FunctionalState> start(const FunctionalContext& ctx) const { return factory_(ctx); }
    // State after pushing the slice history, i.e. every readable index before end_index().
    std::unique_ptr<FunctionalState> state_at(const PathSlice& s) const;

    double eval(const PathSlice& s) const;
    double eval_at(const PathSlice& s, double x) const;
    double weak_spatial_derivative(const PathSlice& s, double x) const;
    double horizontal_derivative(const PathSlice& s) const;
    double singular_curve(const PathSlice& s) const;
    double derivative_jump(const PathSlice& s) const;
    double second_left_derivative(const PathSlice& s, double x) const;

private:
    std::string name_;
    Capabilities caps_;
    Factory factory_;
};

FunctionalSpec make_identity();
FunctionalSpec make_square();
FunctionalSpec make_running_max();
FunctionalSpec make_lookback_fixed(double K);
// Throws std::invalid_argument unless lambda > 1.
FunctionalSpec make_partial_lookback(double lambda);

// Smooth f of the left limits c(t_i-), with gradient and Hessian.
struct CylinderPayoff {
    std::function<double(std::span<const double>)> f;
    std::function<void(std::span<const double>, std::span<double>)> grad;
    std::function<double(std::span<const double>, std::size_t, std::size_t)> hess;
};

CylinderPayoff cylinder_sum_of_squares();
CylinderPayoff cylinder_product();
CylinderPayoff cylinder_sum_sin();

// times must lie in (0, T]; c(t_i-) is read at grid index ceil(t_i/dt) - 1.
FunctionalSpec make_cylinder(CylinderPayoff f, std::vector<double> times);

using Phi = std::function<double(double, double)>;

// F_t(c) = int_{-inf}^{c(t)} int_0^t phi(c(r), y) dr dy with phi(a, .) supported in [-R, R].
FunctionalSpec make_fps(Phi phi, double R, std::size_t y_points = 401);

// exp(1 - 1/(1-u^2)) on (-1, 1).
double bump(double u);
// exp(-a^2 - y^2) * bump(y / 4).
double gaussian_bump_phi(double a, double y);

// Mollifier rho on (0, 2) and its moment-corrected quadrature.
inline constexpr double kRhoNormalisation = 2.25228362104358101;
double rho(double x);
double rho_prime(double x);
double rho_second(double x);

struct MollifierKernel {
    std::vector<double> z;   // nodes in (0, 2)
    std::vector<double> w;   // rho weights: sum 1
    std::vector<double> w1;  // rho' weights: sum 0, first moment -1
    std::vector<double> w2;  // rho'' weights: sum 0, first moment 0, second moment 2
    double mean = 0.0;       // sum w z
};

MollifierKernel mollifier_kernel(std::size_t nodes);

class MollifiedFunctional {
public:
    MollifiedFunctional(FunctionalSpec base, std::size_t n, std::size_t quad_nodes = 64);

    const FunctionalSpec& base() const { return base_; }
    std::size_t n() const { return n_; }
    const MollifierKernel& kernel() const { return kernel_; }

    double value(const FunctionalState& s, double x) const;
    double first(const FunctionalState& s, double x) const;
    double second(const FunctionalState& s, double x) const;
    double horizontal(const FunctionalState& s, double x) const;

    double eval(const PathSlice& s) const;
    double eval_at(const PathSlice& s, double x) const;

private:
    FunctionalSpec base_;
    std::size_t n_;
    MollifierKernel kernel_;
};

MollifiedFunctional mollify(const FunctionalSpec& F, std::size_t n, std::size_t quad_nodes = 64);
double mollified_vertical_derivative(const MollifiedFunctional& M, const PathSlice& s, double x, int order);
double mollified_horizontal_derivative(const MollifiedFunctional& M, const PathSlice& s);

// Richardson limit of (F_{t+g}(c_{t,g}) - F_t(c_t))/g over the ladder of g values (multiples of dt).
double horizontal_derivative_fd(const FunctionalSpec& F, const PathSlice& s, std::span<const double> gammas);

}  // namespace pathflow
