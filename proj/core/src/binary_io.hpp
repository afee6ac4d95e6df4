#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace pathflow::detail {

template <class T>
T to_little(T v)
{
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
            std::swap(b[i], b[sizeof(T) - 1 - i]);
        std::memcpy(&v, b, sizeof(T));
    }
    return v;
}

template <class T>
void put(std::ostream& out, T v)
{
    v = to_little(v);
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in)
{
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in)
        throw std::runtime_error("truncated binary stream");
    return to_little(v);
}

inline void put_magic(std::ostream& out, const char (&magic)[5]) { out.write(magic, 4); }

inline void expect_magic(std::istream& in, const char (&magic)[5])
{
    char buf[4];
    in.read(buf, 4);
    if (!in || std::memcmp(buf, magic, 4) != 0)
        throw std::runtime_error(std::string("bad magic, expected ") + magic);
}

}  // namespace pathflow::detail
