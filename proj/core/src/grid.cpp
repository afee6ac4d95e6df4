#include "pathflow/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace pathflow {

void GridFunction2D::validate() const
{
    if (values.size() != t.size() * x.size())
        throw std::invalid_argument("grid values do not match the axes");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1]))
            throw std::invalid_argument("time grid must increase strictly");
    for (std::size_t j = 1; j < x.size(); ++j)
        if (!(x[j] > x[j - 1]))
            throw std::invalid_argument("level grid must increase strictly");
    for (double v : values)
        if (!std::isfinite(v))
            throw std::invalid_argument("grid values must be finite");
}

GridFunction2D GridFunction2D::sample(std::vector<double> t, std::vector<double> x,
                                      const std::function<double(double, double)>& f)
{
    GridFunction2D g;
    g.t = std::move(t);
    g.x = std::move(x);
    g.values.resize(g.t.size() * g.x.size());
    for (std::size_t i = 0; i < g.nt(); ++i)
        for (std::size_t j = 0; j < g.nx(); ++j)
            g.at(i, j) = f(g.t[i], g.x[j]);
    return g;
}

GridFunction2D GridFunction2D::from_field(const LocalTimeField& field)
{
    GridFunction2D g;
    g.t.reserve(field.n_times());
    for (std::size_t i : field.time_indices)
        g.t.push_back(static_cast<double>(i) * field.dt);
    g.x.reserve(field.n_cols());
    for (std::size_t j = 0; j < field.n_cols(); ++j)
        g.x.push_back(field.levels.level(j));
    g.values = field.values;
    return g;
}

std::vector<std::size_t> coarse_indices(std::size_t n, std::size_t factor)
{
    std::vector<std::size_t> idx;
    if (n == 0)
        return idx;
    for (std::size_t i = 0; i < n - 1; i += factor)
        idx.push_back(i);
    idx.push_back(n - 1);
    return idx;
}

GridFunction2D restrict_grid(const GridFunction2D& h, const std::vector<std::size_t>& ti,
                             const std::vector<std::size_t>& xi)
{
    GridFunction2D g;
    g.t.reserve(ti.size());
    g.x.reserve(xi.size());
    for (std::size_t i : ti)
        g.t.push_back(h.t[i]);
    for (std::size_t j : xi)
        g.x.push_back(h.x[j]);
    g.values.resize(ti.size() * xi.size());
    for (std::size_t a = 0; a < ti.size(); ++a)
        for (std::size_t b = 0; b < xi.size(); ++b)
            g.values[a * xi.size() + b] = h.at(ti[a], xi[b]);
    return g;
}

namespace {

std::size_t axis_factor(std::size_t n, std::size_t k)
{
    std::size_t f = 1;
    for (std::size_t s = 0; s < k && f < n; ++s)
        f *= 2;
    return f;
}

}  // namespace

GridFunction2D coarsen(const GridFunction2D& h, std::size_t k)
{
    if (k == 0)
        return h;
    return restrict_grid(h, coarse_indices(h.nt(), axis_factor(h.nt(), k)),
                         coarse_indices(h.nx(), axis_factor(h.nx(), k)));
}

std::size_t ladder_depth(const GridFunction2D& h)
{
    std::size_t k = 0;
    while (coarse_indices(h.nt(), axis_factor(h.nt(), k)).size() > 2
           || coarse_indices(h.nx(), axis_factor(h.nx(), k)).size() > 2)
        ++k;
    return k + 1;
}

}  // namespace pathflow
