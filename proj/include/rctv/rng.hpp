#pragma once

// Portable random source. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard; the standard distributions are not,
// so every transform used for simulation is spelled out here:
//
//   uniform()        53 high bits of one draw, scaled to [0, 1)
//   uniform_int()    Lemire's multiply-shift with rejection, unbiased
//   normal()         Box-Muller, cosine branch only (one normal per call)
//
// Sub-streams are seeded with splitmix64 of (seed, stream id).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace rctv {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Deterministic child seed for stream (stage, index) of a master seed.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stage,
                                           std::uint64_t index = 0) noexcept {
    return splitmix64(splitmix64(splitmix64(master) ^ stage) + index);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n), n > 0.
    std::uint64_t below(std::uint64_t n) {
        u128 m = static_cast<u128>(next()) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                m = static_cast<u128>(next()) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Uniform integer in [lo, hi], lo <= hi.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(below(span));
    }

    double normal() {
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 == 0.0);
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    bool coin() { return (next() >> 63) != 0; }

private:
    __extension__ using u128 = unsigned __int128;
    std::mt19937_64 engine_;
};

} // namespace rctv
