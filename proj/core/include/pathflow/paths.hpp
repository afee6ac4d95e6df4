#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pathflow {

enum class ProcessKind : std::uint32_t { brownian = 0, euler_sde = 1, symmetric_stable = 2 };

std::string to_string(ProcessKind kind);
ProcessKind process_kind_from_string(const std::string& name);

// Discretised path on the uniform grid t_i = i*T/n_steps.
struct SamplePath {
    double z = 0.0;
    double T = 1.0;
    std::size_t n_steps = 0;
    std::vector<double> values;
    ProcessKind kind = ProcessKind::brownian;
    double beta = 2.0;
    std::uint64_t seed = 0;

    double dt() const { return T / static_cast<double>(n_steps); }
    double time(std::size_t i) const { return static_cast<double>(i) * T / static_cast<double>(n_steps); }
};

struct QVPath {
    const SamplePath* parent = nullptr;
    std::vector<double> cumulative;
};

struct StopRule {
    double level = 0.0;
    std::size_t stop_index = 0;
};

// Lazy view of a path cut at cut_index; reads never copy the parent.
class PathSlice {
public:
    PathSlice(const SamplePath& parent, std::size_t cut_index);

    PathSlice modify_terminal(double x) const;
    PathSlice flat_extend(std::size_t to_index) const;
    PathSlice bump(double h) const;

    double read(std::size_t i) const;
    double terminal() const { return read(cut_); }

    const SamplePath& parent() const { return *parent_; }
    std::size_t cut_index() const { return cut_; }
    // Last readable index: flat_extension_to when set, else cut_index.
    std::size_t end_index() const { return flat_to_ ? *flat_to_ : cut_; }
    double time() const { return parent_->time(end_index()); }

    std::optional<double> terminal_override() const { return override_; }
    std::optional<double> vertical_bump() const { return bump_; }
    std::optional<std::size_t> flat_extension_to() const { return flat_to_; }

private:
    const SamplePath* parent_;
    std::size_t cut_;
    std::optional<double> override_;
    std::optional<std::size_t> flat_to_;
    std::optional<double> bump_;
};

PathSlice slice(const SamplePath& path, std::size_t cut_index);
PathSlice modify_terminal(const PathSlice& s, double x);
PathSlice flat_extend(const PathSlice& s, std::size_t to_index);
PathSlice bump(const PathSlice& s, double h);

using ScalarFn = std::function<double(double)>;

SamplePath simulate_brownian(std::size_t n_steps, double T, double z, std::uint64_t seed);
SamplePath simulate_euler_sde(const ScalarFn& drift, const ScalarFn& vol, std::size_t n_steps, double T, double z,
                              std::uint64_t seed);
// Increments are S_beta((T/n)^{1/beta}, 0, 0); at beta = 2 the increment variance is 2*T/n.
SamplePath simulate_symmetric_stable(double beta, std::size_t n_steps, double T, std::uint64_t seed,
                                     double z = 0.0);

QVPath quadratic_variation(const SamplePath& path);

StopRule stop_at_level(const SamplePath& path, double M);
StopRule stop_at_level(const PathSlice& s, double M);

// Every factor-th value; n_steps must be divisible by factor.
SamplePath coarsen(const SamplePath& path, std::size_t factor);

void write_csv(std::ostream& out, const SamplePath& path);
SamplePath read_csv(std::istream& in);

// "PFL1", u64 n_steps, f64 T, f64 z, u32 kind, f64 beta, u64 seed, then n_steps+1 f64 values.
void write_binary(std::ostream& out, const SamplePath& path);
SamplePath read_binary(std::istream& in);

// 17 significant digits, round-trip exact.
std::string format_real(double v);

}  // namespace pathflow
