#pragma once

#include "pathflow/paths.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

namespace pathflow {

// Levels x_j = lo + j*(hi-lo)/n_levels for j = 0..n_levels.
struct LevelGrid {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t n_levels = 1;

    double spacing() const { return (hi - lo) / static_cast<double>(n_levels); }
    double level(std::size_t j) const { return lo + static_cast<double>(j) * spacing(); }
    std::size_t size() const { return n_levels + 1; }
};

enum class LocalTimeConvention : std::uint32_t { qv_weighted = 0, time_weighted = 1 };

struct LocalTimeField {
    LevelGrid levels;
    std::vector<std::size_t> time_indices;
    std::vector<double> values;  // row-major, time_indices.size() x levels.size()
    LocalTimeConvention convention = LocalTimeConvention::qv_weighted;
    double eps = 0.0;
    double dt = 0.0;
    // Shifted fields only: relative gap between [X~](t) and [X](t), and the curve-TV warning.
    double qv_discrepancy = 0.0;
    bool curve_tv_exceeded = false;

    std::size_t n_times() const { return time_indices.size(); }
    std::size_t n_cols() const { return levels.size(); }
    double at(std::size_t i, std::size_t j) const { return values[i * n_cols() + j]; }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * n_cols(), n_cols()}; }
    // Linear interpolation in the level variable; zero outside the grid.
    double at_level(std::size_t i, double x) const;
};

struct LocalTimeOptions {
    // Last path index included; npos means n_steps.
    std::size_t upto = std::numeric_limits<std::size_t>::max();
    // Explicit time subgrid; empty means the default stride.
    std::vector<std::size_t> time_indices;
    std::size_t max_time_points = 4096;
};

// eps(n) = c*(T/n)^exponent.
double bandwidth(double T, std::size_t n_steps, double c = 1.0, double exponent = 0.4);

// Every index up to `upto` when upto <= max_points, else a stride of ceil(upto/max_points); always ends at upto.
std::vector<std::size_t> default_time_indices(std::size_t upto, std::size_t max_points = 4096);

// Grid with spacing eps/per_eps anchored at integer multiples of the spacing, padded by margin_eps*eps.
LevelGrid make_level_grid(std::span<const double> values, double eps, std::size_t per_eps = 4, double margin_eps = 3.0,
                          std::size_t max_levels = std::numeric_limits<std::size_t>::max());

LocalTimeField local_time_occupation(const SamplePath& path, const QVPath& qv, const LevelGrid& levels, double eps,
                                     const LocalTimeOptions& opts = {});
LocalTimeField local_time_time_weighted(const SamplePath& path, const LevelGrid& levels, double eps,
                                        const LocalTimeOptions& opts = {});
LocalTimeField local_time_downcrossings(const SamplePath& path, const LevelGrid& levels, double eps,
                                        const LocalTimeOptions& opts = {});

// |LHS - RHS| / (1 + |LHS|) at the last stored time.
double occupation_check(const LocalTimeField& field, const std::function<double(double)>& f, const SamplePath& path,
                        const QVPath& qv);

// Field of values[i] - curve[i]; quadratic variation taken from the difference sequence.
LocalTimeField shifted_local_time(const SamplePath& path, std::span<const double> curve, const LevelGrid& levels,
                                  double eps, const LocalTimeOptions& opts = {},
                                  double curve_tv_bound = std::numeric_limits<double>::infinity());

// Core estimator over an arbitrary sequence with per-step weights (weights[k] belongs to step k, k >= 1).
LocalTimeField occupation_field(std::span<const double> values, std::span<const double> weights,
                                const LevelGrid& levels, double eps, std::vector<std::size_t> time_indices,
                                LocalTimeConvention convention, double dt);

void write_csv(std::ostream& out, const LocalTimeField& field);
// "PFL2", u32 convention, f64 eps, f64 dt, f64 lo, f64 hi, u64 n_levels, u64 n_times, u64 time indices, f64 values.
void write_binary(std::ostream& out, const LocalTimeField& field);
LocalTimeField read_local_time_binary(std::istream& in);

}  // namespace pathflow
