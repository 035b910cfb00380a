#pragma once

// Periodic first-order differences on the spatial slices of a coefficient
// matrix, their adjoints, and the FFT-diagonalized solve of
//
//   (mu I + mu sum_i D_i^T D_i) U = rhs_data + sum_i D_i^T (mu G_i - Gamma_i)
//
// Every column of a CoefficientMatrix is one M x N plane stored column-major.
// D_h (horizontal, along the width/column index j) and D_v (vertical, along
// the height/row index i) are forward circular differences:
//
//   D_h x (i, j) = x(i, j+1 mod N) - x(i, j)
//   D_v x (i, j) = x(i+1 mod M, j) - x(i, j)
//
// which is the [1,-1] / [1;-1] filter pair under the psf2otf convention.

#include <algorithm>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <fftw3.h>

#include "rctv/linalg.hpp"

namespace rctv {

enum class Direction { horizontal, vertical };

struct PlaneShape {
    Eigen::Index height = 0; ///< M
    Eigen::Index width = 0;  ///< N
    Eigen::Index pixels() const { return height * width; }
    friend bool operator==(const PlaneShape&, const PlaneShape&) = default;
};

namespace detail {

inline void check_planes(const Matrix& a, const PlaneShape& shape, const char* what) {
    if (shape.height < 1 || shape.width < 1 || a.rows() != shape.pixels()) {
        throw DimensionError(std::string(what) + ": matrix has " + std::to_string(a.rows()) +
                             " rows, plane is " + std::to_string(shape.height) + "x" +
                             std::to_string(shape.width));
    }
}

} // namespace detail

/// Forward circular difference of every slice of u.
inline Matrix apply_diff(const Matrix& u, const PlaneShape& shape, Direction dir) {
    detail::check_planes(u, shape, "apply_diff");
    const Eigen::Index m = shape.height, n = shape.width;
    Matrix out(u.rows(), u.cols());
    for (Eigen::Index r = 0; r < u.cols(); ++r) {
        Eigen::Map<const Matrix> x(u.col(r).data(), m, n);
        Eigen::Map<Matrix> y(out.col(r).data(), m, n);
        if (dir == Direction::horizontal) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const Eigen::Index jn = (j + 1 == n) ? 0 : j + 1;
                y.col(j) = x.col(jn) - x.col(j);
            }
        } else {
            for (Eigen::Index j = 0; j < n; ++j) {
                for (Eigen::Index i = 0; i < m; ++i) {
                    const Eigen::Index in = (i + 1 == m) ? 0 : i + 1;
                    y(i, j) = x(in, j) - x(i, j);
                }
            }
        }
    }
    return out;
}

/// Adjoint of apply_diff under the Euclidean inner product (a backward
/// circular difference with flipped sign).
inline Matrix apply_diff_adjoint(const Matrix& g, const PlaneShape& shape, Direction dir) {
    detail::check_planes(g, shape, "apply_diff_adjoint");
    const Eigen::Index m = shape.height, n = shape.width;
    Matrix out(g.rows(), g.cols());
    for (Eigen::Index r = 0; r < g.cols(); ++r) {
        Eigen::Map<const Matrix> x(g.col(r).data(), m, n);
        Eigen::Map<Matrix> y(out.col(r).data(), m, n);
        if (dir == Direction::horizontal) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const Eigen::Index jp = (j == 0) ? n - 1 : j - 1;
                y.col(j) = x.col(jp) - x.col(j);
            }
        } else {
            for (Eigen::Index j = 0; j < n; ++j) {
                for (Eigen::Index i = 0; i < m; ++i) {
                    const Eigen::Index ip = (i == 0) ? m - 1 : i - 1;
                    y(i, j) = x(ip, j) - x(i, j);
                }
            }
        }
    }
    return out;
}

/// Unnormalized 2-D complex DFT of one column-major M x N plane. Plans are
/// created once and may be executed concurrently on distinct buffers.
class Fft2d {
public:
    using Complex = std::complex<double>;

    explicit Fft2d(PlaneShape shape) : shape_(shape) {
        if (shape.height < 1 || shape.width < 1) throw DimensionError("Fft2d: empty plane");
        std::vector<Complex> scratch(static_cast<std::size_t>(shape.pixels()));
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        std::lock_guard lock(planner_mutex());
        // A column-major M x N array is a row-major N x M array.
        const int n0 = static_cast<int>(shape.width), n1 = static_cast<int>(shape.height);
        forward_ = fftw_plan_dft_2d(n0, n1, buf, buf, FFTW_FORWARD, flags);
        inverse_ = fftw_plan_dft_2d(n0, n1, buf, buf, FFTW_BACKWARD, flags);
        if (!forward_ || !inverse_) throw std::runtime_error("Fft2d: FFTW planning failed");
    }
    ~Fft2d() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(inverse_);
    }
    Fft2d(const Fft2d&) = delete;
    Fft2d& operator=(const Fft2d&) = delete;

    const PlaneShape& shape() const noexcept { return shape_; }

    void forward(Complex* data) const {
        auto* p = reinterpret_cast<fftw_complex*>(data);
        fftw_execute_dft(forward_, p, p);
    }
    /// Unnormalized; divide by M*N to invert forward().
    void inverse(Complex* data) const {
        auto* p = reinterpret_cast<fftw_complex*>(data);
        fftw_execute_dft(inverse_, p, p);
    }

private:
    static std::mutex& planner_mutex() {
        static std::mutex m;
        return m;
    }

    PlaneShape shape_;
    fftw_plan forward_ = nullptr;
    fftw_plan inverse_ = nullptr;
};

/// Optical transfer functions of the two difference filters on an M x N
/// periodic grid and the denominator T_x = |F(D_h)|^2 + |F(D_v)|^2.
struct TransferFunctions {
    PlaneShape shape;
    Eigen::MatrixXcd otf_h; ///< M x N
    Eigen::MatrixXcd otf_v; ///< M x N
    Matrix denom;           ///< M x N, T_x
    std::shared_ptr<const Fft2d> fft;
};

inline TransferFunctions build_transfer_functions(Eigen::Index height, Eigen::Index width) {
    if (height < 2 || width < 2) {
        throw DomainError("build_transfer_functions: plane must be at least 2x2, got " +
                          std::to_string(height) + "x" + std::to_string(width));
    }
    TransferFunctions tf;
    tf.shape = {height, width};
    tf.fft = std::make_shared<const Fft2d>(tf.shape);

    // Filter taps embedded at the origin with periodic wrap so that the
    // circular convolution reproduces apply_diff exactly.
    tf.otf_h = Eigen::MatrixXcd::Zero(height, width);
    tf.otf_h(0, 0) = -1.0;
    tf.otf_h(0, width - 1) = 1.0;
    tf.fft->forward(tf.otf_h.data());

    tf.otf_v = Eigen::MatrixXcd::Zero(height, width);
    tf.otf_v(0, 0) = -1.0;
    tf.otf_v(height - 1, 0) = 1.0;
    tf.fft->forward(tf.otf_v.data());

    tf.denom = tf.otf_h.cwiseAbs2() + tf.otf_v.cwiseAbs2();
    tf.denom(0, 0) = 0.0; // exact; roundoff-free at DC
    return tf;
}

struct USolveResult {
    CoefficientMatrix u;
    double max_imag = 0.0; ///< largest |imaginary part| discarded after the inverse FFT
};

/// Solves the U normal equations slice by slice in the Fourier domain:
///
///   U_r = F^-1[ (F(rhs_r) + sum_i conj(F(D_i)) . F(mu G_i - Gamma_i)_r) / (mu (1 + T_x)) ]
inline USolveResult solve_u_system_detailed(const Matrix& rhs_data, const Matrix& g1, const Matrix& g2,
                                            const Matrix& gam1, const Matrix& gam2, double mu,
                                            const TransferFunctions& tf) {
    if (!(mu > 0.0)) throw DomainError("solve_u_system: mu must be positive");
    detail::check_planes(rhs_data, tf.shape, "solve_u_system");
    for (const Matrix* m : {&g1, &g2, &gam1, &gam2}) {
        if (m->rows() != rhs_data.rows() || m->cols() != rhs_data.cols()) {
            throw DimensionError("solve_u_system: operand shapes differ");
        }
    }

    const Eigen::Index np = tf.shape.pixels();
    const Eigen::Index slices = rhs_data.cols();
    const double inv_n = 1.0 / static_cast<double>(np);
    USolveResult res{CoefficientMatrix(np, slices), 0.0};
    std::vector<double> slice_imag(static_cast<std::size_t>(slices), 0.0);

#pragma omp parallel for schedule(static)
    for (Eigen::Index r = 0; r < slices; ++r) {
        Eigen::VectorXcd acc = rhs_data.col(r).cast<std::complex<double>>();
        Eigen::VectorXcd w1 = (mu * g1.col(r) - gam1.col(r)).cast<std::complex<double>>();
        Eigen::VectorXcd w2 = (mu * g2.col(r) - gam2.col(r)).cast<std::complex<double>>();
        tf.fft->forward(acc.data());
        tf.fft->forward(w1.data());
        tf.fft->forward(w2.data());
        for (Eigen::Index k = 0; k < np; ++k) {
            const auto num = acc(k) + std::conj(tf.otf_h(k)) * w1(k) + std::conj(tf.otf_v(k)) * w2(k);
            acc(k) = num / (mu * (1.0 + tf.denom(k)));
        }
        tf.fft->inverse(acc.data());
        double imag = 0.0;
        for (Eigen::Index k = 0; k < np; ++k) {
            res.u(k, r) = acc(k).real() * inv_n;
            imag = std::max(imag, std::abs(acc(k).imag()) * inv_n);
        }
        slice_imag[static_cast<std::size_t>(r)] = imag;
    }
    for (double v : slice_imag) res.max_imag = std::max(res.max_imag, v);
    return res;
}

inline CoefficientMatrix solve_u_system(const Matrix& rhs_data, const Matrix& g1, const Matrix& g2,
                                        const Matrix& gam1, const Matrix& gam2, double mu,
                                        const TransferFunctions& tf) {
    return solve_u_system_detailed(rhs_data, g1, g2, gam1, gam2, mu, tf).u;
}

} // namespace rctv
