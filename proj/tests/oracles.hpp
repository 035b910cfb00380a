#pragma once

// Reference implementations written directly from the definitions, shared by
// the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <rctv/cube.hpp>
#include <rctv/diffops.hpp>

namespace oracle {

using rctv::Direction;
using rctv::HsiCube;
using rctv::Matrix;

/// argmin over a grid of theta|x| + (x - a)^2 / 2.
inline double prox_grid(double a, double theta, double lo = -3.0, double hi = 3.0, double step = 1e-4) {
    double best_x = lo, best = std::numeric_limits<double>::infinity();
    const auto steps = static_cast<long>(std::llround((hi - lo) / step));
    for (long k = 0; k <= steps; ++k) {
        const double x = lo + static_cast<double>(k) * step;
        const double f = theta * std::abs(x) + 0.5 * (x - a) * (x - a);
        if (f < best) {
            best = f;
            best_x = x;
        }
    }
    return best_x;
}

/// Explicit (M*N) x (M*N) matrix of a difference operator, built from
/// first principles rather than from apply_diff.
inline Matrix dense_diff(Eigen::Index m, Eigen::Index n, Direction dir) {
    Matrix d = Matrix::Zero(m * n, m * n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < m; ++i) {
            const Eigen::Index k = j * m + i;
            const Eigen::Index next = dir == Direction::horizontal ? ((j + 1) % n) * m + i : j * m + (i + 1) % m;
            d(k, next) += 1.0;
            d(k, k) -= 1.0;
        }
    return d;
}

inline double psnr(const HsiCube& a, const HsiCube& b, std::size_t band) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.width(); ++j)
        for (std::size_t i = 0; i < a.height(); ++i) {
            const double d = a(i, j, band) - b(i, j, band);
            acc += d * d;
        }
    return 10.0 * std::log10(1.0 / (acc / static_cast<double>(a.pixels())));
}

// Direct 2-D window sums, no separability.
inline double ssim(const HsiCube& a, const HsiCube& b, std::size_t band, int w, double sigma) {
    std::vector<double> k(static_cast<std::size_t>(w * w));
    double ksum = 0.0;
    const double c = (w - 1) / 2.0;
    for (int p = 0; p < w; ++p)
        for (int q = 0; q < w; ++q) {
            const double v = std::exp(-((p - c) * (p - c) + (q - c) * (q - c)) / (2 * sigma * sigma));
            k[static_cast<std::size_t>(p * w + q)] = v;
            ksum += v;
        }
    for (auto& v : k) v /= ksum;
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    double total = 0.0;
    int count = 0;
    for (int i0 = 0; i0 + w <= static_cast<int>(a.height()); ++i0)
        for (int j0 = 0; j0 + w <= static_cast<int>(a.width()); ++j0) {
            double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
            for (int p = 0; p < w; ++p)
                for (int q = 0; q < w; ++q) {
                    const double kw = k[static_cast<std::size_t>(p * w + q)];
                    const double x = a(static_cast<std::size_t>(i0 + p), static_cast<std::size_t>(j0 + q), band);
                    const double y = b(static_cast<std::size_t>(i0 + p), static_cast<std::size_t>(j0 + q), band);
                    mx += kw * x;
                    my += kw * y;
                    xx += kw * x * x;
                    yy += kw * y * y;
                    xy += kw * x * y;
                }
            const double sx = xx - mx * mx, sy = yy - my * my, sxy = xy - mx * my;
            total += ((2 * mx * my + c1) * (2 * sxy + c2)) / ((mx * mx + my * my + c1) * (sx + sy + c2));
            ++count;
        }
    return total / count;
}

inline double ergas(const HsiCube& a, const HsiCube& b) {
    double acc = 0.0;
    for (std::size_t band = 0; band < a.bands(); ++band) {
        double mean = 0.0, mse = 0.0;
        for (std::size_t j = 0; j < a.width(); ++j)
            for (std::size_t i = 0; i < a.height(); ++i) {
                mean += a(i, j, band);
                mse += (a(i, j, band) - b(i, j, band)) * (a(i, j, band) - b(i, j, band));
            }
        mean /= static_cast<double>(a.pixels());
        mse /= static_cast<double>(a.pixels());
        acc += mse / (mean * mean);
    }
    return 100.0 * std::sqrt(acc / static_cast<double>(a.bands()));
}

inline double msam(const HsiCube& a, const HsiCube& b) {
    double total = 0.0;
    for (std::size_t j = 0; j < a.width(); ++j)
        for (std::size_t i = 0; i < a.height(); ++i) {
            double xy = 0, xx = 0, yy = 0;
            for (std::size_t band = 0; band < a.bands(); ++band) {
                xy += a(i, j, band) * b(i, j, band);
                xx += a(i, j, band) * a(i, j, band);
                yy += b(i, j, band) * b(i, j, band);
            }
            // atan2 form: independent of the production formula and accurate near 0
            const double cross = std::sqrt(std::max(0.0, xx * yy - xy * xy));
            total += std::atan2(cross, xy);
        }
    return total / static_cast<double>(a.pixels());
}

} // namespace oracle
