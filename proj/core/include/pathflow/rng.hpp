#pragma once

#include <array>
#include <cstdint>

namespace pathflow::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

// Philox4x32-10.
Counter philox4x32(Counter ctr, Key key) noexcept;

// Stream tags keep draws for different purposes disjoint.
enum class Stream : std::uint32_t { gaussian = 0, stable = 1, uniform = 2 };

// Four words keyed by (seed, stream, index).
Counter draw(std::uint64_t seed, Stream stream, std::uint64_t index) noexcept;

// Uniform on the open interval (0,1) from 52 bits.
double to_open_unit(std::uint32_t hi, std::uint32_t lo) noexcept;

double uniform(std::uint64_t seed, std::uint64_t index) noexcept;

// Box-Muller, one variate per index.
double gaussian(std::uint64_t seed, std::uint64_t index) noexcept;

// Standard symmetric beta-stable variate, Chambers-Mallows-Stuck, unit scale.
double symmetric_stable(std::uint64_t seed, std::uint64_t index, double beta) noexcept;

}  // namespace pathflow::rng
