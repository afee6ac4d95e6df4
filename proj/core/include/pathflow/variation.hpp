#pragma once

#include "pathflow/grid.hpp"
#include "pathflow/localtime.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pathflow {

struct VariationParams {
    double p = 1.0;
    double q = 2.5;
    double p_tilde = 2.0;
    double q_tilde = 2.0;
    double alpha = 0.5;
    double delta = 0.5;
    double a = 1.0;
    double b = 1.5;
    double a_prime = 1.5;
    double b_prime = 2.25;
    double alpha1 = 3.0;
    double alpha2 = 5.0;
    double beta = 2.0;

    bool young_condition() const;
    bool header_condition() const;
    bool stable_condition() const;
};

// Strict inequalities 1 <= a < 2beta/(beta+1), 1 <= b < 2/(3-beta), a <= b, 1 < beta <= 2.
bool stable_orders_admissible(double a, double b, double beta);
// Same check; throws std::invalid_argument naming the first violated inequality.
void check_stable_orders(double a, double b, double beta);

enum class VariationMethod { grid_sum, dp_exact, dyadic_sup };

std::string to_string(VariationMethod m);

struct VariationReport {
    std::vector<double> orders;
    double value = 0.0;
    VariationMethod method = VariationMethod::grid_sum;
    int ladder_level = 0;
};

// Sum of |increment|^p over consecutive entries, to the 1/p.
double p_variation_grid(std::span<const double> seq, double p);

// Supremum over all sub-partitions by an O(len^2) dynamic programme; throws too_large above max_n.
double p_variation_sup(std::span<const double> seq, double p, std::size_t max_n = 4096);

// Same supremum with the candidate points reduced to local extrema; no length cap.
double p_variation_extrema(std::span<const double> seq, double p);

struct Bivariation {
    double norm1 = 0.0;  // sup over level pairs of the p-variation in time
    double norm2 = 0.0;  // sup over time pairs of the q-variation in level
    bool sampled1 = false;
    bool sampled2 = false;
};

Bivariation bivariation(const GridFunction2D& h, double p, double q, std::size_t pair_budget = 1000000);

// Pair indices over n points: all pairs when n(n-1)/2 <= budget, else all pairs of a strided subset.
std::vector<std::size_t> pair_support(std::size_t n, std::size_t budget);

// Joint variations of rectangular increments, maximised over the dyadic coarsening ladder.
double joint_rv(const GridFunction2D& h, double p, double q);
double joint_lv(const GridFunction2D& h, double r, double s);
// Nested sums on the grid as given, without the 1/q root.
double rv_sum(const GridFunction2D& h, double p, double q);
double lv_sum(const GridFunction2D& h, double r, double s);

double holder_control_constant(const GridFunction2D& h, double p_tilde, double q_tilde);

struct InterpolationResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double sup_increment = 0.0;
    bool all_rectangles = false;
};

// LV^{a',b'} against sup|Delta h|^{(a'-a)/a'} * (LV-sum of order (a,b))^{1/b'}, b' = (a'/a) b.
InterpolationResult interpolation_check(const GridFunction2D& h, double a, double b, double a_prime,
                                        std::size_t rectangle_budget = 50000000);

enum class HolderAxis { space, time };

struct HolderFit {
    double exponent = 0.0;
    std::vector<double> spacings;
    std::vector<double> medians;
};

HolderFit holder_exponent_fit_detail(const LocalTimeField& field, HolderAxis axis);
double holder_exponent_fit(const LocalTimeField& field, HolderAxis axis);

}  // namespace pathflow
