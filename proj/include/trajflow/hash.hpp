#pragma once

#include <cstddef>
#include <cstdint>

namespace trajflow {

// Incremental FNV-1a over bytes; used for file checksums.
struct Fnv1a64 {
    std::uint64_t state = 0xcbf29ce484222325ULL;

    void update(const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            state ^= p[i];
            state *= 0x100000001b3ULL;
        }
    }
    std::uint64_t digest() const { return state; }
};

}  // namespace trajflow
