#pragma once

#include "pathflow/grid.hpp"
#include "pathflow/paths.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace pathflow {

struct Integral2DResult {
    double value = 0.0;
    std::vector<double> ladder_values;  // coarsest first, finest (= value) last
    bool converged = false;
    double cauchy_gap = 0.0;
    // G does not vanish on the lower time edge and the lower level edge.
    bool edge_noncompliant = false;
};

struct SummationByParts {
    double interior = 0.0;
    double boundary_time = 0.0;
    double boundary_space = 0.0;
    double corner = 0.0;
    double total() const { return interior + boundary_time + boundary_space + corner; }
};

// sum_i h[i-1] (G[i] - G[i-1]).
double young_integral_1d(std::span<const double> h, std::span<const double> G);

// sum_{i,j} h[i-1][j-1] Delta_i Delta_j G.
double young_sum_2d(const GridFunction2D& h, const GridFunction2D& G);

Integral2DResult young_integral_2d(const GridFunction2D& h, const GridFunction2D& G, double tolerance = 1e-3);

// Discrete Abel transform in both variables; total() equals young_sum_2d(h, G).
SummationByParts summation_by_parts_2d(const GridFunction2D& h, const GridFunction2D& G);

// sum_{k <= upto} integrand[k-1] (X[k] - X[k-1]).
double ito_forward_integral(std::span<const double> integrand, const SamplePath& path, std::size_t upto);

}  // namespace pathflow
