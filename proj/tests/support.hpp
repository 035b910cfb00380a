#pragma once

// Test-side generators. Deliberately independent of rctv::Rng so library
// randomness and test inputs never share a code path.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include <rctv/cube.hpp>

namespace testgen {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : s_(seed ^ 0x6a09e667f3bcc909ull) {}

    std::uint64_t next() {
        std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double unit() { return static_cast<double>(next() >> 11) / 9007199254740992.0; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
    long integer(long lo, long hi) { return lo + static_cast<long>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
    double gauss() {
        const double u1 = 1.0 - unit(), u2 = unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::sin(2.0 * std::numbers::pi * u2);
    }

    Eigen::MatrixXd matrix(Eigen::Index r, Eigen::Index c) {
        Eigen::MatrixXd m(r, c);
        for (Eigen::Index j = 0; j < c; ++j)
            for (Eigen::Index i = 0; i < r; ++i) m(i, j) = gauss();
        return m;
    }
    Eigen::MatrixXd uniform_matrix(Eigen::Index r, Eigen::Index c, double lo = 0.0, double hi = 1.0) {
        Eigen::MatrixXd m(r, c);
        for (Eigen::Index j = 0; j < c; ++j)
            for (Eigen::Index i = 0; i < r; ++i) m(i, j) = uniform(lo, hi);
        return m;
    }
    /// Random r x c matrix with orthonormal columns (QR of a Gaussian matrix).
    Eigen::MatrixXd stiefel(Eigen::Index r, Eigen::Index c) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(matrix(r, c));
        return qr.householderQ() * Eigen::MatrixXd::Identity(r, c);
    }
    /// Exactly rank-k matrix.
    Eigen::MatrixXd low_rank(Eigen::Index r, Eigen::Index c, Eigen::Index k) { return matrix(r, k) * matrix(k, c); }

    rctv::HsiCube cube(std::size_t m, std::size_t n, std::size_t b, double lo = 0.0, double hi = 1.0) {
        return rctv::HsiCube(m, n, uniform_matrix(static_cast<Eigen::Index>(m * n), static_cast<Eigen::Index>(b), lo, hi));
    }

private:
    std::uint64_t s_;
};

inline double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const double d = b.norm();
    return d > 0 ? (a - b).norm() / d : (a - b).norm();
}

/// Fresh per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("rctv_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace testgen
