#pragma once

// Dense kernels used by the solver: thin SVD, truncated-SVD initialization,
// elementwise soft thresholding, the orthogonal Procrustes update for the
// spectral basis, and projection of data onto an orthonormal basis.

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "rctv/cube.hpp"

namespace rctv {

/// M*N x R coefficients of X = U V^T. Column r is slice r of the coefficient
/// cube, laid out like a band of HsiCube.
using CoefficientMatrix = Matrix;

inline constexpr double kOrthonormalTol = 1e-8;

/// A = left * diag(singular_values) * right^T, singular values descending.
/// Each right singular vector has its largest-magnitude entry positive.
struct ThinSvd {
    Matrix left;
    Vector singular_values;
    Matrix right;

    Eigen::Index rank() const { return singular_values.size(); }
    Matrix reconstruct() const { return left * singular_values.asDiagonal() * right.transpose(); }
};

inline ThinSvd thin_svd(const Matrix& a) {
    if (!a.allFinite()) throw DomainError("thin_svd: input has non-finite entries");
    if (a.size() == 0) return {Matrix(a.rows(), 0), Vector(0), Matrix(a.cols(), 0)};

    Eigen::JacobiSVD<Matrix, Eigen::ColPivHouseholderQRPreconditioner> svd(
        a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    ThinSvd out{svd.matrixU(), svd.singularValues(), svd.matrixV()};

    for (Eigen::Index k = 0; k < out.rank(); ++k) {
        Eigen::Index imax = 0;
        out.right.col(k).cwiseAbs().maxCoeff(&imax);
        if (out.right(imax, k) < 0.0) {
            out.right.col(k) *= -1.0;
            out.left.col(k) *= -1.0;
        }
    }
    return out;
}

struct LowRankFactors {
    CoefficientMatrix u; ///< M*N x R, first R left singular vectors scaled by sigma
    Matrix v;            ///< B x R, orthonormal columns
};

/// Best rank-R approximation of Y in factored form, U = U_R Sigma_R and V = V_R.
inline LowRankFactors truncated_svd_init(const Matrix& y, Eigen::Index rank) {
    if (rank < 1 || rank > y.cols() || rank > y.rows()) {
        throw DomainError("truncated_svd_init: rank " + std::to_string(rank) + " outside [1, " +
                          std::to_string(std::min(y.rows(), y.cols())) + "]");
    }
    const ThinSvd svd = thin_svd(y);
    LowRankFactors f;
    f.u = svd.left.leftCols(rank) * svd.singular_values.head(rank).asDiagonal();
    f.v = svd.right.leftCols(rank);
    return f;
}

inline double soft_threshold(double a, double theta) {
    const double mag = std::abs(a) - theta;
    return mag > 0.0 ? std::copysign(mag, a) : 0.0;
}

/// Elementwise sign(a) * max(|a| - theta, 0), the proximal map of theta*||.||_1.
template <typename Derived>
Matrix soft_threshold(const Eigen::MatrixBase<Derived>& a, double theta) {
    if (!(theta >= 0.0)) throw DomainError("soft_threshold: threshold must be non-negative");
    return a.unaryExpr([theta](double x) { return soft_threshold(x, theta); });
}

inline double orthonormality_error(const Matrix& v) {
    if (v.cols() == 0) return 0.0;
    const Matrix gram = v.transpose() * v;
    return (gram - Matrix::Identity(v.cols(), v.cols())).cwiseAbs().maxCoeff();
}

inline bool has_orthonormal_columns(const Matrix& v, double tol = kOrthonormalTol) {
    return orthonormality_error(v) <= tol;
}

/// argmax <W, V> over V with orthonormal columns: V = B C^T for W = B D C^T.
inline Matrix procrustes_v(const Matrix& w) {
    const ThinSvd svd = thin_svd(w);
    return svd.left * svd.right.transpose();
}

/// Coefficients of X in the orthonormal basis V: U = X V.
inline CoefficientMatrix project_coefficients(const Matrix& x, const Matrix& v) {
    if (x.cols() != v.rows()) {
        throw DimensionError("project_coefficients: X has " + std::to_string(x.cols()) +
                             " columns, V has " + std::to_string(v.rows()) + " rows");
    }
    if (!has_orthonormal_columns(v)) {
        throw DomainError("project_coefficients: V does not have orthonormal columns");
    }
    return x * v;
}

inline double row_distance(const Matrix& a, Eigen::Index i, Eigen::Index j) {
    return (a.row(i) - a.row(j)).norm();
}

/// Angle in radians between two vectors, 0 when either is zero, computed as
/// 2*atan2(|a^ - b^|, |a^ + b^|) on the unit vectors.
template <typename A, typename B>
double vector_angle(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    const auto ua = (a / na).eval();
    const auto ub = (b / nb).eval();
    return 2.0 * std::atan2((ua - ub).norm(), (ua + ub).norm());
}

inline double row_angle(const Matrix& a, Eigen::Index i, Eigen::Index j) {
    return vector_angle(a.row(i), a.row(j));
}

} // namespace rctv
