#pragma once

// Little-endian scalar I/O for the model and weave files.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "cno/errors.hpp"

namespace cno::binio {

static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");

template <class T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) {
        throw IntegrityError("unexpected end of binary stream");
    }
    return v;
}

// Magic strings are exactly 8 bytes, a trailing NUL included when shorter.
inline void put_magic(std::ostream& os, const char* magic) { os.write(magic, 8); }

inline void expect_magic(std::istream& is, const char* magic) {
    char buf[8];
    if (!is.read(buf, 8) || std::memcmp(buf, magic, 8) != 0) {
        throw IntegrityError(std::string("bad magic, expected ") + std::string(magic, strnlen(magic, 8)));
    }
}

}  // namespace cno::binio
