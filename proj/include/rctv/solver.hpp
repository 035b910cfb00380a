#pragma once

// ADMM solver for
//
//   min  sum_i tau_i ||D_i U||_1 + beta ||E||_F^2 + lambda ||S||_1
//   s.t. Y = U V^T + E + S,  V^T V = I
//
// with splitting variables G_i = D_i U and multipliers Gamma_1..3. One
// iteration updates G_i, V, U, E, S in that order, then the multipliers, then
// grows mu geometrically up to mu_max.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rctv/cube.hpp"
#include "rctv/diffops.hpp"
#include "rctv/linalg.hpp"

namespace rctv {

struct DenoiseConfig {
    Eigen::Index rank = 0; ///< R; must be set (1 <= R <= B) before solving
    double tau1 = 0.01;
    double tau2 = 0.01;
    double beta = 50.0;
    double lambda = 1.0;
    double mu0 = 1e-3;
    double rho = 1.25;
    double epsilon = 1e-6;
    int max_iter = 50;
    double mu_max = 1e6;
    /// Evaluate the augmented Lagrangian around every primal block update and
    /// record whether it decreased. Roughly doubles the cost of an iteration.
    bool check_descent = false;
    /// Stop at the first iteration meeting the residual tolerance; when false
    /// always runs max_iter iterations.
    bool stop_on_convergence = true;

    /// Mostly-Gaussian noise: beta = 1, lambda = 100.
    static DenoiseConfig gaussian(double tau, Eigen::Index rank = 0) {
        DenoiseConfig c;
        c.tau1 = c.tau2 = tau;
        c.beta = 1.0;
        c.lambda = 100.0;
        c.rank = rank;
        return c;
    }
    /// Mixed Gaussian and sparse noise: lambda = 1, beta = 50.
    static DenoiseConfig mixed(double tau, Eigen::Index rank = 0) {
        DenoiseConfig c;
        c.tau1 = c.tau2 = tau;
        c.beta = 50.0;
        c.lambda = 1.0;
        c.rank = rank;
        return c;
    }

    void validate() const {
        auto fail = [](const std::string& m) { throw DomainError("DenoiseConfig: " + m); };
        if (rank < 1) fail("rank must be at least 1");
        if (!(tau1 >= 0.0) || !(tau2 >= 0.0)) fail("tau must be non-negative");
        if (!(beta >= 0.0)) fail("beta must be non-negative");
        if (!(lambda >= 0.0)) fail("lambda must be non-negative");
        if (!(mu0 > 0.0) || !std::isfinite(mu0)) fail("mu0 must be positive");
        if (!(rho > 1.0) || !std::isfinite(rho)) fail("rho must exceed 1");
        if (!(epsilon > 0.0)) fail("epsilon must be positive");
        if (max_iter < 1) fail("max_iter must be positive");
        if (!(mu_max >= mu0)) fail("mu_max must be at least mu0");
    }
};

struct SolverState {
    CoefficientMatrix u; ///< M*N x R
    Matrix v;            ///< B x R
    Matrix e, s;         ///< M*N x B
    Matrix g1, g2;       ///< M*N x R
    Matrix gam1, gam2;   ///< M*N x R
    Matrix gam3;         ///< M*N x B
    double mu = 0.0;
    int iter = 0;
};

struct IterationDiagnostics {
    int iter = 0;
    double fit_res = 0.0;    ///< ||Y - U V^T - E - S||_F^2 / ||Y||_F^2
    double split_res1 = 0.0; ///< ||D_h U - G_1||_F^2 / ||Y||_F^2
    double split_res2 = 0.0; ///< ||D_v U - G_2||_F^2 / ||Y||_F^2
    double objective = 0.0;
    double mu = 0.0;         ///< penalty used during this iteration
    double rel_change = 0.0; ///< ||X_t - X_{t-1}||_F / ||X_{t-1}||_F, X = U V^T
    double wall_ms = 0.0;    ///< elapsed since solve() started
    double max_imag = 0.0;   ///< discarded imaginary part of the U solve
    double orth_err = 0.0;   ///< max |V^T V - I| after the V update
    bool descent_checked = false;
    bool descent_ok = true;
    double descent_worst = 0.0; ///< largest relative increase of L over the five blocks
};

struct SolveResult {
    HsiCube restored;
    std::vector<IterationDiagnostics> diagnostics;
    SolverState state;
    bool converged = false;
};

// ---------------------------------------------------------------------------
// Block updates

inline Matrix update_g(const Matrix& grad_u, const Matrix& gam, double mu, double tau) {
    if (!(mu > 0.0)) throw DomainError("update_g: mu must be positive");
    return soft_threshold(grad_u + gam / mu, tau / mu);
}

inline Matrix update_g(const CoefficientMatrix& u, const Matrix& gam, double mu, double tau,
                       const PlaneShape& shape, Direction dir) {
    return update_g(apply_diff(u, shape, dir), gam, mu, tau);
}

/// Y - E - S + Gamma_3 / mu, shared by the V and U updates.
inline Matrix lagrangian_target(const Matrix& y, const Matrix& e, const Matrix& s, const Matrix& gam3,
                                double mu) {
    return y - e - s + gam3 / mu;
}

inline Matrix update_v(const Matrix& target, const CoefficientMatrix& u) {
    return procrustes_v(target.transpose() * u);
}

inline Matrix update_v(const Matrix& y, const Matrix& e, const Matrix& s, const Matrix& gam3, double mu,
                       const CoefficientMatrix& u) {
    if (!(mu > 0.0)) throw DomainError("update_v: mu must be positive");
    return update_v(lagrangian_target(y, e, s, gam3, mu), u);
}

inline USolveResult update_u_detailed(const Matrix& target, double mu, const Matrix& v, const Matrix& g1,
                                      const Matrix& g2, const Matrix& gam1, const Matrix& gam2,
                                      const TransferFunctions& tf) {
    const Matrix rhs = mu * (target * v);
    return solve_u_system_detailed(rhs, g1, g2, gam1, gam2, mu, tf);
}

inline CoefficientMatrix update_u(const Matrix& y, const Matrix& e, const Matrix& s, const Matrix& gam3,
                                  double mu, const Matrix& v, const Matrix& g1, const Matrix& g2,
                                  const Matrix& gam1, const Matrix& gam2, const TransferFunctions& tf) {
    if (!(mu > 0.0)) throw DomainError("update_u: mu must be positive");
    return update_u_detailed(lagrangian_target(y, e, s, gam3, mu), mu, v, g1, g2, gam1, gam2, tf).u;
}

/// E = (mu (Y - X - S) + Gamma_3) / (mu + 2 beta), X = U V^T.
inline Matrix update_e(const Matrix& y, const Matrix& x, const Matrix& s, const Matrix& gam3, double mu,
                       double beta) {
    if (!(mu > 0.0) || !(beta >= 0.0)) throw DomainError("update_e: need mu > 0 and beta >= 0");
    return (mu * (y - x - s) + gam3) / (mu + 2.0 * beta);
}

inline Matrix update_e(const Matrix& y, const CoefficientMatrix& u, const Matrix& v, const Matrix& s,
                       const Matrix& gam3, double mu, double beta) {
    return update_e(y, Matrix(u * v.transpose()), s, gam3, mu, beta);
}

/// S = soft(Y - X - E + Gamma_3 / mu, lambda / mu), X = U V^T.
inline Matrix update_s(const Matrix& y, const Matrix& x, const Matrix& e, const Matrix& gam3, double mu,
                       double lambda) {
    if (!(mu > 0.0) || !(lambda >= 0.0)) throw DomainError("update_s: need mu > 0 and lambda >= 0");
    return soft_threshold(y - x - e + gam3 / mu, lambda / mu);
}

inline Matrix update_s(const Matrix& y, const CoefficientMatrix& u, const Matrix& v, const Matrix& e,
                       const Matrix& gam3, double mu, double lambda) {
    return update_s(y, Matrix(u * v.transpose()), e, gam3, mu, lambda);
}

struct Residuals {
    double fit = 0.0;    ///< ||Y - X - E - S||_F^2 (unnormalized)
    double split1 = 0.0; ///< ||D_h U - G_1||_F^2
    double split2 = 0.0; ///< ||D_v U - G_2||_F^2
};

/// Dual ascent on all three multipliers, then mu <- min(rho mu, mu_max).
/// grad1/grad2 are D_h U and D_v U for the current U; x is U V^T.
inline Residuals update_multipliers(SolverState& st, const Matrix& y, const Matrix& x, const Matrix& grad1,
                                    const Matrix& grad2, double rho, double mu_max) {
    const Matrix r1 = grad1 - st.g1;
    const Matrix r2 = grad2 - st.g2;
    const Matrix r3 = y - x - st.e - st.s;
    st.gam1 += st.mu * r1;
    st.gam2 += st.mu * r2;
    st.gam3 += st.mu * r3;
    st.mu = std::min(rho * st.mu, mu_max);
    return {r3.squaredNorm(), r1.squaredNorm(), r2.squaredNorm()};
}

inline Residuals update_multipliers(SolverState& st, const Matrix& y, const PlaneShape& shape, double rho,
                                    double mu_max) {
    return update_multipliers(st, y, st.u * st.v.transpose(), apply_diff(st.u, shape, Direction::horizontal),
                              apply_diff(st.u, shape, Direction::vertical), rho, mu_max);
}

// ---------------------------------------------------------------------------
// Objective values

/// sum_i tau_i ||D_i U||_1 + beta ||E||_F^2 + lambda ||S||_1
inline double objective_value(const SolverState& st, const DenoiseConfig& cfg, const PlaneShape& shape) {
    return cfg.tau1 * apply_diff(st.u, shape, Direction::horizontal).lpNorm<1>() +
           cfg.tau2 * apply_diff(st.u, shape, Direction::vertical).lpNorm<1>() + cfg.beta * st.e.squaredNorm() +
           cfg.lambda * st.s.lpNorm<1>();
}

inline double augmented_lagrangian(const SolverState& st, const Matrix& y, const DenoiseConfig& cfg,
                                   const PlaneShape& shape) {
    const double mu = st.mu;
    const Matrix d1 = apply_diff(st.u, shape, Direction::horizontal);
    const Matrix d2 = apply_diff(st.u, shape, Direction::vertical);
    double l = cfg.tau1 * st.g1.lpNorm<1>() + cfg.tau2 * st.g2.lpNorm<1>();
    l += 0.5 * mu * (d1 - st.g1 + st.gam1 / mu).squaredNorm();
    l += 0.5 * mu * (d2 - st.g2 + st.gam2 / mu).squaredNorm();
    l += cfg.beta * st.e.squaredNorm() + cfg.lambda * st.s.lpNorm<1>();
    l += 0.5 * mu * (y - st.u * st.v.transpose() - st.e - st.s + st.gam3 / mu).squaredNorm();
    return l;
}

// ---------------------------------------------------------------------------
// Driver

/// Cold start: U, V from the truncated SVD of Y, everything else zero.
inline SolverState initial_state(const Matrix& y, const DenoiseConfig& cfg) {
    SolverState st;
    auto f = truncated_svd_init(y, cfg.rank);
    st.u = std::move(f.u);
    st.v = std::move(f.v);
    const Eigen::Index np = y.rows(), b = y.cols(), r = cfg.rank;
    st.e = Matrix::Zero(np, b);
    st.s = Matrix::Zero(np, b);
    st.gam3 = Matrix::Zero(np, b);
    st.g1 = Matrix::Zero(np, r);
    st.g2 = Matrix::Zero(np, r);
    st.gam1 = Matrix::Zero(np, r);
    st.gam2 = Matrix::Zero(np, r);
    st.mu = cfg.mu0;
    return st;
}

/// Runs the ADMM iteration on the normalized cube y. Non-convergence within
/// max_iter is reported through SolveResult::converged, not thrown.
inline SolveResult solve(const HsiCube& cube, const DenoiseConfig& cfg) {
    cfg.validate();
    if (static_cast<std::size_t>(cfg.rank) > cube.bands()) {
        throw DomainError("solve: rank " + std::to_string(cfg.rank) + " exceeds band count " +
                          std::to_string(cube.bands()));
    }
    if (!cube.all_finite()) throw DomainError("solve: input cube has non-finite values");

    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();

    const Matrix& y = cube.casorati();
    const PlaneShape shape{static_cast<Eigen::Index>(cube.height()), static_cast<Eigen::Index>(cube.width())};
    const TransferFunctions tf = build_transfer_functions(shape.height, shape.width);
    const double y_energy = std::max(y.squaredNorm(), std::numeric_limits<double>::min());

    SolveResult out;
    SolverState st = initial_state(y, cfg);
    Matrix grad1 = apply_diff(st.u, shape, Direction::horizontal);
    Matrix grad2 = apply_diff(st.u, shape, Direction::vertical);
    Matrix x = st.u * st.v.transpose();

    for (int it = 1; it <= cfg.max_iter; ++it) {
        IterationDiagnostics d;
        d.iter = it;
        d.mu = st.mu;
        d.descent_checked = cfg.check_descent;

        double l_prev = cfg.check_descent ? augmented_lagrangian(st, y, cfg, shape) : 0.0;
        auto check = [&] {
            if (!cfg.check_descent) return;
            const double l = augmented_lagrangian(st, y, cfg, shape);
            const double rel = (l - l_prev) / std::max(1.0, std::abs(l_prev));
            d.descent_worst = std::max(d.descent_worst, rel);
            if (rel > 1e-10) d.descent_ok = false;
            l_prev = l;
        };

        st.g1 = update_g(grad1, st.gam1, st.mu, cfg.tau1);
        st.g2 = update_g(grad2, st.gam2, st.mu, cfg.tau2);
        check();

        const Matrix target = lagrangian_target(y, st.e, st.s, st.gam3, st.mu);
        st.v = update_v(target, st.u);
        d.orth_err = orthonormality_error(st.v);
        check();

        auto us = update_u_detailed(target, st.mu, st.v, st.g1, st.g2, st.gam1, st.gam2, tf);
        st.u = std::move(us.u);
        d.max_imag = us.max_imag;
        check();

        Matrix x_new = st.u * st.v.transpose();
        st.e = update_e(y, x_new, st.s, st.gam3, st.mu, cfg.beta);
        check();
        st.s = update_s(y, x_new, st.e, st.gam3, st.mu, cfg.lambda);
        check();

        grad1 = apply_diff(st.u, shape, Direction::horizontal);
        grad2 = apply_diff(st.u, shape, Direction::vertical);
        const Residuals res = update_multipliers(st, y, x_new, grad1, grad2, cfg.rho, cfg.mu_max);
        st.iter = it;

        const double x_norm = x.norm();
        d.rel_change = x_norm > 0.0 ? (x_new - x).norm() / x_norm : (x_new - x).norm();
        x = std::move(x_new);

        d.fit_res = res.fit / y_energy;
        d.split_res1 = res.split1 / y_energy;
        d.split_res2 = res.split2 / y_energy;
        d.objective = objective_value(st, cfg, shape);
        d.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        out.diagnostics.push_back(d);

        if (d.fit_res <= cfg.epsilon && d.split_res1 <= cfg.epsilon && d.split_res2 <= cfg.epsilon) {
            out.converged = true;
            if (cfg.stop_on_convergence) break;
        }
    }

    out.restored = HsiCube(cube.height(), cube.width(), std::move(x));
    out.state = std::move(st);
    return out;
}

} // namespace rctv
