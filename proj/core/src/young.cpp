#include "pathflow/young.hpp"

#include <cmath>
#include <stdexcept>

namespace pathflow {

namespace {

void check_same_grid(const GridFunction2D& h, const GridFunction2D& G)
{
    h.validate();
    G.validate();
    if (h.t != G.t || h.x != G.x)
        throw std::invalid_argument("integrand and integrator live on different grids");
}

}  // namespace

double young_integral_1d(std::span<const double> h, std::span<const double> G)
{
    if (h.size() != G.size() || h.size() < 2)
        throw std::invalid_argument("young_integral_1d needs equal lengths >= 2");
    double s = 0.0;
    for (std::size_t i = 1; i < h.size(); ++i)
        s += h[i - 1] * (G[i] - G[i - 1]);
    return s;
}

double young_sum_2d(const GridFunction2D& h, const GridFunction2D& G)
{
    double s = 0.0;
    for (std::size_t i = 1; i < G.nt(); ++i)
        for (std::size_t j = 1; j < G.nx(); ++j)
            s += h.at(i - 1, j - 1) * G.rect(i, j);
    return s;
}

Integral2DResult young_integral_2d(const GridFunction2D& h, const GridFunction2D& G, double tolerance)
{
    check_same_grid(h, G);
    Integral2DResult r;
    const std::size_t depth = ladder_depth(G);
    r.ladder_values.resize(depth);
    for (std::size_t k = 0; k < depth; ++k) {
        const double v = k == 0 ? young_sum_2d(h, G) : young_sum_2d(coarsen(h, k), coarsen(G, k));
        r.ladder_values[depth - 1 - k] = v;
    }
    r.value = r.ladder_values.back();
    if (depth >= 2) {
        r.cauchy_gap = std::abs(r.ladder_values[depth - 1] - r.ladder_values[depth - 2]);
        r.converged = r.cauchy_gap <= tolerance * (1.0 + std::abs(r.value));
    }
    for (std::size_t i = 0; i < G.nt() && !r.edge_noncompliant; ++i)
        r.edge_noncompliant = G.at(i, 0) != 0.0;
    for (std::size_t j = 0; j < G.nx() && !r.edge_noncompliant; ++j)
        r.edge_noncompliant = G.at(0, j) != 0.0;
    return r;
}

SummationByParts summation_by_parts_2d(const GridFunction2D& h, const GridFunction2D& G)
{
    check_same_grid(h, G);
    SummationByParts s;
    const std::size_t N = G.nt() - 1, M = G.nx() - 1;
    if (G.nt() < 2 || G.nx() < 2)
        return s;
    for (std::size_t i = 1; i < N; ++i)
        for (std::size_t j = 1; j < M; ++j)
            s.interior += h.rect(i, j) * G.at(i, j);
    for (std::size_t i = 1; i < N; ++i)
        s.boundary_time -= (h.at(i, M - 1) - h.at(i - 1, M - 1)) * G.at(i, M) - (h.at(i, 0) - h.at(i - 1, 0)) * G.at(i, 0);
    for (std::size_t j = 1; j < M; ++j)
        s.boundary_space -= (h.at(N - 1, j) - h.at(N - 1, j - 1)) * G.at(N, j) - (h.at(0, j) - h.at(0, j - 1)) * G.at(0, j);
    s.corner = h.at(N - 1, M - 1) * G.at(N, M) - h.at(N - 1, 0) * G.at(N, 0) - h.at(0, M - 1) * G.at(0, M)
               + h.at(0, 0) * G.at(0, 0);
    return s;
}

double ito_forward_integral(std::span<const double> integrand, const SamplePath& path, std::size_t upto)
{
    if (upto > path.n_steps || integrand.size() < upto)
        throw std::invalid_argument("integrand shorter than the integration range");
    double s = 0.0;
    for (std::size_t k = 1; k <= upto; ++k)
        s += integrand[k - 1] * (path.values[k] - path.values[k - 1]);
    return s;
}

}  // namespace pathflow
