#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace monocard {

/// Seeded random stream used by every generator in the toolkit.
///
/// Bounded draws are computed from the raw 64-bit engine output with
/// rejection sampling instead of std::uniform_int_distribution, so a seed
/// yields the same sequence on every standard library implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform draw in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) {
            throw std::invalid_argument("Rng::below: bound must be positive");
        }
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    /// Uniform draw in [lo, hi], inclusive on both ends.
    std::int64_t between(std::int64_t lo, std::int64_t hi) {
        if (hi < lo) {
            throw std::invalid_argument("Rng::between: empty range");
        }
        const auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
        if (span == UINT64_MAX) {
            return static_cast<std::int64_t>(engine_());
        }
        return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + below(span + 1));
    }

    /// Uniform double in [0, 1) with 53 bits of precision.
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool chance(double p) { return unit() < p; }

    template <class T>
    const T& pick(const std::vector<T>& items) {
        if (items.empty()) {
            throw std::invalid_argument("Rng::pick: empty choice set");
        }
        return items[below(items.size())];
    }

private:
    std::mt19937_64 engine_;
};

/// splitmix64 finalizer; derives independent stream seeds from (seed, stream).
inline std::uint64_t mixSeed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace monocard
