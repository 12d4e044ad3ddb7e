#pragma once

#include <cstdint>
#include <string_view>

#include "trajflow/array.hpp"

namespace trajflow {

// Deterministic xoshiro256++ generator. Integer output is identical on every
// platform for a given seed and call sequence. Independent streams are derived
// by hashing a purpose label (or an index) into the seed, so adding draws to
// one stream never shifts another.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed);

    // Derived generator for a named purpose ("data", "noise", "init", ...).
    SeededRng stream(std::string_view purpose) const;
    // Derived generator for an index (per-trajectory, per-sample, ...).
    SeededRng stream(std::uint64_t index) const;

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64();

    // Uniform on [0, 1) with 53 random mantissa bits.
    double uniform();
    double uniform(double lo, double hi);
    // Uniform integer in [0, n); n must be positive.
    std::uint64_t uniform_int(std::uint64_t n);

    // Standard normal via Box-Muller; second value of each pair is cached.
    double normal();

    Array normal_array(std::vector<std::size_t> shape);
    Array uniform_array(std::vector<std::size_t> shape, double lo, double hi);

private:
    SeededRng(std::uint64_t seed, std::uint64_t salt);
    void init_state(std::uint64_t material);

    std::uint64_t seed_ = 0;
    std::uint64_t state_[4] = {};
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace trajflow
