#include "trajflow/rng.hpp"

#include <cmath>
#include <numbers>

namespace trajflow {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed) { init_state(seed); }

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t salt) : seed_(seed) {
    // Mix salt in before expansion so distinct streams diverge completely.
    std::uint64_t x = seed ^ rotl(salt, 17) ^ 0xa0761d6478bd642fULL;
    init_state(splitmix64(x));
}

void SeededRng::init_state(std::uint64_t material) {
    std::uint64_t x = material;
    for (auto& s : state_) s = splitmix64(x);
}

SeededRng SeededRng::stream(std::string_view purpose) const {
    return SeededRng(seed_, fnv1a64(purpose));
}

SeededRng SeededRng::stream(std::uint64_t index) const {
    return SeededRng(seed_, 0x9e3779b97f4a7c15ULL ^ (index + 1));
}

std::uint64_t SeededRng::next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double SeededRng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t SeededRng::uniform_int(std::uint64_t n) {
    if (n == 0) throw DomainError("uniform_int: n must be positive");
    // Rejection sampling keeps the result unbiased and platform-independent.
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

double SeededRng::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    // Box-Muller on (0,1] x [0,1).
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    cached_normal_ = r * std::sin(a);
    has_cached_normal_ = true;
    return r * std::cos(a);
}

Array SeededRng::normal_array(std::vector<std::size_t> shape) {
    Array a(std::move(shape));
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = normal();
    return a;
}

Array SeededRng::uniform_array(std::vector<std::size_t> shape, double lo, double hi) {
    Array a(std::move(shape));
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = uniform(lo, hi);
    return a;
}

}  // namespace trajflow
