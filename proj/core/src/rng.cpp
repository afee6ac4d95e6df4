#include "pathflow/rng.hpp"

#include <cmath>
#include <numbers>

namespace pathflow::rng {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline Counter round(const Counter& c, const Key& k) noexcept
{
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

Counter philox4x32(Counter ctr, Key key) noexcept
{
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            key[0] += kW0;
            key[1] += kW1;
        }
        ctr = round(ctr, key);
    }
    return ctr;
}

Counter draw(std::uint64_t seed, Stream stream, std::uint64_t index) noexcept
{
    const Counter ctr{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      static_cast<std::uint32_t>(stream), 0u};
    const Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return philox4x32(ctr, key);
}

double to_open_unit(std::uint32_t hi, std::uint32_t lo) noexcept
{
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 20) ^ (lo >> 12);
    return (static_cast<double>(bits & ((1ull << 52) - 1)) + 0.5) * 0x1.0p-52;
}

double uniform(std::uint64_t seed, std::uint64_t index) noexcept
{
    const Counter w = draw(seed, Stream::uniform, index);
    return to_open_unit(w[0], w[1]);
}

double gaussian(std::uint64_t seed, std::uint64_t index) noexcept
{
    const Counter w = draw(seed, Stream::gaussian, index);
    const double u1 = to_open_unit(w[0], w[1]);
    const double u2 = to_open_unit(w[2], w[3]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double symmetric_stable(std::uint64_t seed, std::uint64_t index, double beta) noexcept
{
    const Counter w = draw(seed, Stream::stable, index);
    const double v = std::numbers::pi * (to_open_unit(w[0], w[1]) - 0.5);
    const double e = -std::log(to_open_unit(w[2], w[3]));
    if (beta == 2.0)
        return 2.0 * std::sin(v) * std::sqrt(e);
    return std::sin(beta * v) / std::pow(std::cos(v), 1.0 / beta)
           * std::pow(std::cos((1.0 - beta) * v) / e, (1.0 - beta) / beta);
}

}  // namespace pathflow::rng
