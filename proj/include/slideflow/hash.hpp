#pragma once

#include <cstddef>
#include <cstdint>

namespace slideflow {

// FNV-1a. Used as the trailing integrity checksum of the binary container
// formats (not cryptographic; detects truncation and bit flips).
inline std::uint64_t fnv1a64(const void* bytes, std::size_t n,
                             std::uint64_t seed = 14695981039346656037ull) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace slideflow
