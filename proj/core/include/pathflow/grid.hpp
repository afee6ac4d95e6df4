#pragma once

#include "pathflow/localtime.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace pathflow {

// Function sampled on a time x level grid, row-major in time.
struct GridFunction2D {
    std::vector<double> t;
    std::vector<double> x;
    std::vector<double> values;

    std::size_t nt() const { return t.size(); }
    std::size_t nx() const { return x.size(); }
    double at(std::size_t i, std::size_t j) const { return values[i * x.size() + j]; }
    double& at(std::size_t i, std::size_t j) { return values[i * x.size() + j]; }
    // Delta_i Delta_j h at cell (i, j), i, j >= 1.
    double rect(std::size_t i, std::size_t j) const
    {
        return (at(i, j) - at(i - 1, j)) - (at(i, j - 1) - at(i - 1, j - 1));
    }
    void validate() const;

    static GridFunction2D sample(std::vector<double> t, std::vector<double> x,
                                 const std::function<double(double, double)>& f);
    static GridFunction2D from_field(const LocalTimeField& field);
};

// Indices 0, f, 2f, ... with the last index always kept.
std::vector<std::size_t> coarse_indices(std::size_t n, std::size_t factor);

GridFunction2D restrict_grid(const GridFunction2D& h, const std::vector<std::size_t>& ti,
                             const std::vector<std::size_t>& xi);

// Dyadic coarsening by 2^k along each axis; an axis stops shrinking at two points.
GridFunction2D coarsen(const GridFunction2D& h, std::size_t k);

// Number of distinct members of the dyadic ladder, finest first.
std::size_t ladder_depth(const GridFunction2D& h);

}  // namespace pathflow
