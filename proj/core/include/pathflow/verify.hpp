#pragma once

#include "pathflow/functionals.hpp"
#include "pathflow/localtime.hpp"
#include "pathflow/paths.hpp"
#include "pathflow/variation.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace pathflow {

enum class Formula { smooth_c12, singular_curve, young_pq, stable_ab };

std::string to_string(Formula f);
Formula formula_from_string(const std::string& name);

struct DecompositionTerms {
    double horizontal = 0.0;
    double stochastic = 0.0;
    double second_order_or_localtime = 0.0;
    std::optional<double> jump_localtime;

    double sum() const { return horizontal + stochastic + second_order_or_localtime + jump_localtime.value_or(0.0); }
    double magnitude() const
    {
        return std::abs(horizontal) + std::abs(stochastic) + std::abs(second_order_or_localtime)
               + std::abs(jump_localtime.value_or(0.0));
    }
};

struct PathMeta {
    std::uint64_t seed = 0;
    std::size_t n_steps = 0;
    double eps = 0.0;
    std::size_t t_index = 0;
};

struct DecompositionReport {
    Formula formula = Formula::smooth_c12;
    double lhs = 0.0;      // F_t(X_t) - F_0(X_0)
    double value_end = 0.0;  // F_t(X_t)
    DecompositionTerms terms;
    double residual = 0.0;  // lhs - terms.sum()
    PathMeta meta;
    // stable_ab only: the checked orders.
    std::optional<VariationParams> params;
    // |residual| against the larger of |lhs| and the summed term magnitudes.
    double scaled_residual() const;
};

// Residual bookkeeping shared by every formula.
void finalize(DecompositionReport& r);

struct DecomposeOptions {
    std::size_t per_eps = 4;
    double margin_eps = 3.0;
    std::size_t max_levels = std::numeric_limits<std::size_t>::max();
    std::size_t max_time_points = 4096;
};

// Stop index for M = 10(1+|z|).
std::size_t default_t_index(const SamplePath& path);

DecompositionReport decompose_smooth(const MollifiedFunctional& M, const SamplePath& path, const QVPath& qv,
                                     std::size_t t_index, const DecomposeOptions& opts = {});

DecompositionReport decompose_singular(const FunctionalSpec& F, const SamplePath& path, const QVPath& qv,
                                       const LevelGrid& levels, double eps, std::size_t t_index,
                                       const DecomposeOptions& opts = {});
// Level grid anchored to the shifted path X - gamma(X).
DecompositionReport decompose_singular(const FunctionalSpec& F, const SamplePath& path, const QVPath& qv, double eps,
                                       std::size_t t_index, const DecomposeOptions& opts = {});

DecompositionReport decompose_young(const FunctionalSpec& F, const SamplePath& path, const QVPath& qv,
                                    const LevelGrid& levels, double eps, std::size_t t_index,
                                    const DecomposeOptions& opts = {});

// Throws std::invalid_argument naming the violated order inequality.
DecompositionReport decompose_stable(const FunctionalSpec& F, const SamplePath& path, const LevelGrid& levels,
                                     double eps, std::size_t t_index, const VariationParams& params,
                                     const DecomposeOptions& opts = {});

struct ResidualStats {
    std::size_t n_paths = 0;
    double mean_abs = 0.0;
    double median_abs = 0.0;
    double p95_abs = 0.0;
    double normalizer = 0.0;  // mean |lhs|
    double relative = 0.0;    // mean_abs / normalizer
    double signed_mean = 0.0;
    std::size_t n_failed = 0;
    std::size_t n_excluded = 0;
    double coverage = 1.0;  // included / attempted
};

ResidualStats residual_stats(const std::vector<DecompositionReport>& reports, std::size_t n_failed = 0,
                             std::size_t n_excluded = 0);

struct ProcessSpec {
    ProcessKind kind = ProcessKind::brownian;
    double T = 1.0;
    double z = 0.0;
    double beta = 2.0;
    // euler_sde presets: "gbm" (mu x, sigma x), "ou" (-theta x, sigma), "unit" (0, 1).
    std::string preset = "gbm";
    double mu = 0.0;
    double sigma = 1.0;
    double theta = 1.0;
};

SamplePath simulate_process(const ProcessSpec& spec, std::size_t n_steps, std::uint64_t seed);

struct EnsembleConfig {
    Formula formula = Formula::smooth_c12;
    ProcessSpec process;
    std::function<FunctionalSpec()> functional;
    std::size_t n_steps = 1024;
    std::uint64_t seed0 = 0;
    std::size_t n_paths = 1;
    double eps_c = 1.0;
    double eps_exponent = 0.4;
    std::size_t mollification_n = 64;
    std::size_t quad_nodes = 64;
    VariationParams params;
    // Horizon t of the check; the stop index of default_t_index caps it when stop is set.
    std::optional<double> t_end;
    bool stop = true;
    // Keep only paths with F_t(X_t) > 0.
    bool condition_positive_value = false;
    DecomposeOptions decompose;
    double max_failure_rate = 0.10;
    // 0 means PATHFLOW_THREADS or the hardware concurrency.
    std::size_t threads = 0;
};

struct PathOutcome {
    std::uint64_t seed = 0;
    bool ok = false;
    bool excluded = false;
    std::string error;
    DecompositionReport report;
};

struct LadderLevel {
    std::size_t n_steps = 0;
    double eps = 0.0;
    ResidualStats stats;
    std::vector<PathOutcome> paths;
};

// One level at cfg.n_steps.
LadderLevel ensemble(const EnsembleConfig& cfg);

// Each path is simulated once at the finest n and coarsened for the other levels; levels come back in the given order.
std::vector<LadderLevel> refinement_ladder(const EnsembleConfig& cfg, const std::vector<std::size_t>& n_levels);

// Median |residual| non-increasing with at most max_inversions rises, each within the given fraction.
bool ladder_non_increasing(const std::vector<LadderLevel>& ladder, std::size_t max_inversions = 1,
                           double allowance = 0.2);

std::size_t worker_count(std::size_t requested = 0);

// Runs fn(0..n-1) on worker_count(threads) threads; the first exception stops the pool and is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, std::size_t threads = 0);

}  // namespace pathflow
