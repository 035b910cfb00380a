#pragma once

// Seeded synthetic test cubes: exactly rank-R, spatially smooth, values in
// (0, 1].

#include <cmath>
#include <cstdint>
#include <numbers>

#include "rctv/cube.hpp"
#include "rctv/rng.hpp"

namespace rctv {

struct SyntheticSpec {
    std::size_t height = 32;
    std::size_t width = 32;
    std::size_t bands = 10;
    std::size_t rank = 3;
    std::uint64_t seed = 1;
    int blobs_per_map = 4; ///< Gaussian bumps summed into each abundance map
};

/// Abundance maps are sums of smooth Gaussian bumps plus a low-frequency
/// periodic ramp; end-member spectra are positive smooth curves. The product
/// is strictly positive and is divided by its maximum, which keeps the rank
/// exactly R (a per-band min-max shift would add a rank-one offset).
inline HsiCube make_low_rank_cube(const SyntheticSpec& spec) {
    Rng rng(derive_seed(spec.seed, 0x5e17));
    const auto m = static_cast<Eigen::Index>(spec.height);
    const auto n = static_cast<Eigen::Index>(spec.width);
    const auto b = static_cast<Eigen::Index>(spec.bands);
    const auto r = static_cast<Eigen::Index>(spec.rank);
    const double pi = std::numbers::pi;

    Matrix abund(m * n, r);
    for (Eigen::Index k = 0; k < r; ++k) {
        const double fx = rng.uniform_int(1, 2), fy = rng.uniform_int(1, 2);
        const double phx = rng.uniform(0, 2 * pi), phy = rng.uniform(0, 2 * pi);
        Eigen::Map<Matrix> plane(abund.col(k).data(), m, n);
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < m; ++i)
                plane(i, j) = 0.5 + 0.25 * std::sin(2 * pi * fx * double(i) / double(m) + phx) *
                                        std::cos(2 * pi * fy * double(j) / double(n) + phy);
        for (int blob = 0; blob < spec.blobs_per_map; ++blob) {
            const double ci = rng.uniform(0, double(m)), cj = rng.uniform(0, double(n));
            const double w = rng.uniform(0.08, 0.2) * double(std::min(m, n));
            const double amp = rng.uniform(0.3, 1.0);
            for (Eigen::Index j = 0; j < n; ++j)
                for (Eigen::Index i = 0; i < m; ++i) {
                    const double di = double(i) - ci, dj = double(j) - cj;
                    plane(i, j) += amp * std::exp(-(di * di + dj * dj) / (2 * w * w));
                }
        }
    }

    Matrix spectra(b, r);
    for (Eigen::Index k = 0; k < r; ++k) {
        const double center = rng.uniform(0, 1), width = rng.uniform(0.2, 0.6);
        const double base = rng.uniform(0.1, 0.4), slope = rng.uniform(-0.1, 0.1);
        for (Eigen::Index l = 0; l < b; ++l) {
            const double t = b > 1 ? double(l) / double(b - 1) : 0.0;
            const double d = (t - center) / width;
            spectra(l, k) = base + slope * t + std::exp(-d * d);
        }
    }

    Matrix x = abund * spectra.transpose();
    x /= x.maxCoeff();
    return HsiCube(spec.height, spec.width, std::move(x));
}

} // namespace rctv
