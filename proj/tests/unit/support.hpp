#pragma once

#include "pathflow/paths.hpp"

#include <cstddef>
#include <vector>

namespace pathflow::testing {

// Path with the given values on [0, T].
inline SamplePath make_path(std::vector<double> values, double T = 1.0)
{
    SamplePath p;
    p.n_steps = values.size() - 1;
    p.T = T;
    p.z = values.front();
    p.values = std::move(values);
    return p;
}

inline SamplePath linear_path(std::size_t n, double z, double slope, double T = 1.0)
{
    std::vector<double> v(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        v[i] = z + slope * static_cast<double>(i) * T / static_cast<double>(n);
    return make_path(std::move(v), T);
}

}  // namespace pathflow::testing
