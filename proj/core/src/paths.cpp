#include "pathflow/paths.hpp"

#include "binary_io.hpp"
#include "pathflow/errors.hpp"
#include "pathflow/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pathflow {

std::string to_string(ProcessKind kind)
{
    switch (kind) {
    case ProcessKind::brownian: return "brownian";
    case ProcessKind::euler_sde: return "euler_sde";
    case ProcessKind::symmetric_stable: return "symmetric_stable";
    }
    return "unknown";
}

ProcessKind process_kind_from_string(const std::string& name)
{
    if (name == "brownian") return ProcessKind::brownian;
    if (name == "euler_sde") return ProcessKind::euler_sde;
    if (name == "symmetric_stable") return ProcessKind::symmetric_stable;
    throw std::invalid_argument("unknown process kind '" + name + "'");
}

PathSlice::PathSlice(const SamplePath& parent, std::size_t cut_index) : parent_(&parent), cut_(cut_index)
{
    if (cut_index > parent.n_steps)
        throw std::invalid_argument("cut_index out of range");
}

PathSlice PathSlice::modify_terminal(double x) const
{
    if (bump_)
        throw std::invalid_argument("terminal modification conflicts with vertical bump");
    PathSlice s = *this;
    s.override_ = x;
    return s;
}

PathSlice PathSlice::flat_extend(std::size_t to_index) const
{
    if (to_index < cut_ || to_index > parent_->n_steps)
        throw std::invalid_argument("flat extension index out of range");
    PathSlice s = *this;
    s.flat_to_ = to_index;
    return s;
}

PathSlice PathSlice::bump(double h) const
{
    if (override_)
        throw std::invalid_argument("vertical bump conflicts with terminal modification");
    PathSlice s = *this;
    s.bump_ = h;
    return s;
}

double PathSlice::read(std::size_t i) const
{
    if (i > end_index())
        throw std::invalid_argument("read past the end of the slice");
    if (i < cut_)
        return parent_->values[i];
    if (override_)
        return *override_;
    const double v = parent_->values[cut_];
    return bump_ ? v + *bump_ : v;
}

PathSlice slice(const SamplePath& path, std::size_t cut_index) { return PathSlice(path, cut_index); }
PathSlice modify_terminal(const PathSlice& s, double x) { return s.modify_terminal(x); }
PathSlice flat_extend(const PathSlice& s, std::size_t to_index) { return s.flat_extend(to_index); }
PathSlice bump(const PathSlice& s, double h) { return s.bump(h); }

namespace {

void check_grid(std::size_t n_steps, double T)
{
    if (n_steps < 1)
        throw std::invalid_argument("n_steps must be positive");
    if (!(T > 0.0) || !std::isfinite(T))
        throw std::invalid_argument("T must be positive");
}

SamplePath empty_path(std::size_t n_steps, double T, double z, ProcessKind kind, std::uint64_t seed)
{
    SamplePath p;
    p.z = z;
    p.T = T;
    p.n_steps = n_steps;
    p.kind = kind;
    p.seed = seed;
    p.values.resize(n_steps + 1);
    p.values[0] = z;
    return p;
}

}  // namespace

SamplePath simulate_brownian(std::size_t n_steps, double T, double z, std::uint64_t seed)
{
    check_grid(n_steps, T);
    SamplePath p = empty_path(n_steps, T, z, ProcessKind::brownian, seed);
    const double sd = std::sqrt(T / static_cast<double>(n_steps));
    for (std::size_t i = 0; i < n_steps; ++i)
        p.values[i + 1] = p.values[i] + sd * rng::gaussian(seed, i);
    return p;
}

SamplePath simulate_euler_sde(const ScalarFn& drift, const ScalarFn& vol, std::size_t n_steps, double T, double z,
                              std::uint64_t seed)
{
    check_grid(n_steps, T);
    SamplePath p = empty_path(n_steps, T, z, ProcessKind::euler_sde, seed);
    const double dt = T / static_cast<double>(n_steps);
    const double sd = std::sqrt(dt);
    for (std::size_t i = 0; i < n_steps; ++i) {
        const double v = p.values[i];
        const double next = v + drift(v) * dt + vol(v) * (sd * rng::gaussian(seed, i));
        if (!std::isfinite(next))
            throw simulation_diverged(i + 1, "euler scheme produced a non-finite value");
        p.values[i + 1] = next;
    }
    return p;
}

SamplePath simulate_symmetric_stable(double beta, std::size_t n_steps, double T, std::uint64_t seed, double z)
{
    if (!(beta > 1.0 && beta <= 2.0))
        throw std::invalid_argument("beta must lie in (1,2]");
    check_grid(n_steps, T);
    SamplePath p = empty_path(n_steps, T, z, ProcessKind::symmetric_stable, seed);
    p.beta = beta;
    const double scale = std::pow(T / static_cast<double>(n_steps), 1.0 / beta);
    for (std::size_t i = 0; i < n_steps; ++i) {
        const double next = p.values[i] + scale * rng::symmetric_stable(seed, i, beta);
        if (!std::isfinite(next))
            throw simulation_diverged(i + 1, "stable increment overflowed");
        p.values[i + 1] = next;
    }
    return p;
}

QVPath quadratic_variation(const SamplePath& path)
{
    QVPath qv;
    qv.parent = &path;
    qv.cumulative.resize(path.values.size());
    qv.cumulative[0] = 0.0;
    for (std::size_t i = 1; i < path.values.size(); ++i) {
        const double d = path.values[i] - path.values[i - 1];
        qv.cumulative[i] = qv.cumulative[i - 1] + d * d;
    }
    return qv;
}

StopRule stop_at_level(const SamplePath& path, double M)
{
    if (!(M > 0.0))
        throw std::invalid_argument("stop level must be positive");
    StopRule r{M, path.n_steps};
    for (std::size_t i = 0; i <= path.n_steps; ++i)
        if (std::abs(path.values[i]) > M) {
            r.stop_index = i;
            break;
        }
    return r;
}

StopRule stop_at_level(const PathSlice& s, double M)
{
    if (!(M > 0.0))
        throw std::invalid_argument("stop level must be positive");
    StopRule r{M, s.end_index()};
    for (std::size_t i = 0; i <= s.end_index(); ++i)
        if (std::abs(s.read(i)) > M) {
            r.stop_index = i;
            break;
        }
    return r;
}

SamplePath coarsen(const SamplePath& path, std::size_t factor)
{
    if (factor == 0 || path.n_steps % factor != 0)
        throw std::invalid_argument("coarsening factor must divide n_steps");
    SamplePath c = path;
    c.n_steps = path.n_steps / factor;
    c.values.resize(c.n_steps + 1);
    for (std::size_t i = 0; i <= c.n_steps; ++i)
        c.values[i] = path.values[i * factor];
    return c;
}

std::string format_real(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(std::ostream& out, const SamplePath& path)
{
    out << "time,value\r\n";
    for (std::size_t i = 0; i <= path.n_steps; ++i)
        out << format_real(path.time(i)) << ',' << format_real(path.values[i]) << "\r\n";
}

SamplePath read_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line.rfind("time,value", 0) != 0)
        throw std::runtime_error("path csv: missing header");
    std::vector<double> t, v;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("path csv: malformed row");
        t.push_back(std::stod(line.substr(0, comma)));
        v.push_back(std::stod(line.substr(comma + 1)));
    }
    if (v.size() < 2)
        throw std::runtime_error("path csv: need at least two rows");
    SamplePath p;
    p.n_steps = v.size() - 1;
    p.T = t.back();
    p.z = v.front();
    p.values = std::move(v);
    return p;
}

void write_binary(std::ostream& out, const SamplePath& path)
{
    detail::put_magic(out, "PFL1");
    detail::put<std::uint64_t>(out, path.n_steps);
    detail::put<double>(out, path.T);
    detail::put<double>(out, path.z);
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(path.kind));
    detail::put<double>(out, path.beta);
    detail::put<std::uint64_t>(out, path.seed);
    for (double v : path.values)
        detail::put<double>(out, v);
}

SamplePath read_binary(std::istream& in)
{
    detail::expect_magic(in, "PFL1");
    SamplePath p;
    p.n_steps = detail::get<std::uint64_t>(in);
    p.T = detail::get<double>(in);
    p.z = detail::get<double>(in);
    const auto kind = detail::get<std::uint32_t>(in);
    if (kind > 2)
        throw std::runtime_error("PFL1: unknown process kind");
    p.kind = static_cast<ProcessKind>(kind);
    p.beta = detail::get<double>(in);
    p.seed = detail::get<std::uint64_t>(in);
    p.values.resize(p.n_steps + 1);
    for (double& v : p.values)
        v = detail::get<double>(in);
    return p;
}

}  // namespace pathflow
