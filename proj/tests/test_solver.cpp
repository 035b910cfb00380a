#include <cmath>

#include <gtest/gtest.h>

#include <rctv/noise.hpp>
#include <rctv/solver.hpp>
#include <rctv/synthetic.hpp>

#include "support.hpp"

using namespace rctv;

namespace {

double scalar_prox_objective(double g, double target, double mu, double tau) {
    return tau * std::abs(g) + 0.5 * mu * (target - g) * (target - g);
}

/// Random but consistent solver state for an M x N x B problem.
SolverState random_state(testgen::Gen& g, const PlaneShape& s, Eigen::Index b, Eigen::Index r) {
    const Eigen::Index np = s.pixels();
    SolverState st;
    st.u = g.matrix(np, r);
    st.v = g.stiefel(b, r);
    st.e = 0.1 * g.matrix(np, b);
    st.s = 0.1 * g.matrix(np, b);
    st.g1 = g.matrix(np, r);
    st.g2 = g.matrix(np, r);
    st.gam1 = g.matrix(np, r);
    st.gam2 = g.matrix(np, r);
    st.gam3 = g.matrix(np, b);
    st.mu = g.uniform(0.5, 3);
    return st;
}

DenoiseConfig random_config(testgen::Gen& g, Eigen::Index r) {
    DenoiseConfig c;
    c.rank = r;
    c.tau1 = g.uniform(0, 1);
    c.tau2 = g.uniform(0, 1);
    c.beta = g.uniform(0, 5);
    c.lambda = g.uniform(0, 2);
    return c;
}

} // namespace

// --- G ---------------------------------------------------------------------

TEST(UpdateG, ZeroThresholdIsExact) {
    testgen::Gen g(51);
    const PlaneShape s{4, 5};
    const Matrix u = g.matrix(20, 2), gam = g.matrix(20, 2);
    const Matrix out = update_g(u, gam, 2.0, 0.0, s, Direction::vertical);
    EXPECT_EQ(out, Matrix(apply_diff(u, s, Direction::vertical) + gam / 2.0));
}

TEST(UpdateG, ConstantSlicesGiveZero) {
    const PlaneShape s{3, 4};
    const Matrix u = Matrix::Constant(12, 2, 0.3);
    EXPECT_TRUE(update_g(u, Matrix::Zero(12, 2), 1.0, 0.1, s, Direction::horizontal).isZero(0));
}

TEST(UpdateG, ElementwiseProx) {
    testgen::Gen g(52);
    const PlaneShape s{4, 4};
    const Matrix u = g.matrix(16, 2), gam = g.matrix(16, 2);
    const double mu = 1.7, tau = 0.6;
    const Matrix grad = apply_diff(u, s, Direction::horizontal);
    const Matrix out = update_g(grad, gam, mu, tau);
    for (Eigen::Index k = 0; k < out.size(); ++k) {
        const double t = grad(k) + gam(k) / mu;
        const double f0 = scalar_prox_objective(out(k), t, mu, tau);
        for (double delta : {-1e-3, 1e-3, -0.1, 0.1})
            EXPECT_LE(f0, scalar_prox_objective(out(k) + delta, t, mu, tau) + 1e-15);
    }
}

TEST(UpdateG, RejectsNonPositiveMu) {
    EXPECT_THROW(update_g(Matrix::Zero(2, 1), Matrix::Zero(2, 1), 0.0, 0.1), DomainError);
}

// --- V ---------------------------------------------------------------------

TEST(UpdateV, NoiselessRecoversBasis) {
    testgen::Gen g(53);
    const Matrix u = g.matrix(40, 3), q = g.stiefel(8, 3);
    const Matrix y = u * q.transpose();
    const Matrix z = Matrix::Zero(40, 8);
    const Matrix v = update_v(y, z, z, z, 1.0, u);
    EXPECT_LE((v - q).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((update_v(Matrix(3.5 * y), z, z, z, 1.0, u) - v).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(UpdateV, QuadraticTermDoesNotIncrease) {
    testgen::Gen g(54);
    for (int t = 0; t < 20; ++t) {
        const Matrix y = g.matrix(30, 7), e = g.matrix(30, 7), sp = g.matrix(30, 7), gam3 = g.matrix(30, 7);
        const Matrix u = g.matrix(30, 3), v0 = g.stiefel(7, 3);
        const double mu = g.uniform(0.1, 4);
        const Matrix target = lagrangian_target(y, e, sp, gam3, mu);
        const Matrix v = update_v(y, e, sp, gam3, mu, u);
        EXPECT_LE(orthonormality_error(v), 1e-12);
        EXPECT_LE((target - u * v.transpose()).squaredNorm(), (target - u * v0.transpose()).squaredNorm() + 1e-10);
    }
}

// --- U ---------------------------------------------------------------------

TEST(UpdateU, ZeroNoiseFixedPoint) {
    testgen::Gen g(55);
    const PlaneShape s{6, 5};
    const auto tf = build_transfer_functions(6, 5);
    const Matrix u = g.matrix(30, 2), v = g.stiefel(7, 2);
    const Matrix y = u * v.transpose();
    const Matrix z7 = Matrix::Zero(30, 7), z2 = Matrix::Zero(30, 2);
    const Matrix g1 = apply_diff(u, s, Direction::horizontal), g2 = apply_diff(u, s, Direction::vertical);
    const Matrix out = update_u(y, z7, z7, z7, 1.3, v, g1, g2, z2, z2, tf);
    EXPECT_LE((out - u).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(UpdateU, LagrangianDecrease) {
    testgen::Gen g(56);
    const PlaneShape s{5, 6};
    const auto tf = build_transfer_functions(5, 6);
    for (int t = 0; t < 10; ++t) {
        SolverState st = random_state(g, s, 6, 2);
        const DenoiseConfig cfg = random_config(g, 2);
        const Matrix y = g.matrix(30, 6);
        const double before = augmented_lagrangian(st, y, cfg, s);
        st.u = update_u(y, st.e, st.s, st.gam3, st.mu, st.v, st.g1, st.g2, st.gam1, st.gam2, tf);
        EXPECT_LE(augmented_lagrangian(st, y, cfg, s), before + 1e-10 * std::abs(before));
    }
}

// --- E, S --------------------------------------------------------------------

TEST(UpdateE, Limits) {
    testgen::Gen g(57);
    const Matrix y = g.matrix(20, 4), x = g.matrix(20, 4), sp = g.matrix(20, 4), gam3 = g.matrix(20, 4);
    const double mu = 1.5;
    EXPECT_LE((update_e(y, x, sp, gam3, mu, 0.0) - (y - x - sp + gam3 / mu)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE(update_e(y, x, sp, gam3, mu, 1e12).norm(), 1e-9 * y.norm());
}

TEST(UpdateE, Stationarity) {
    testgen::Gen g(58);
    for (int t = 0; t < 20; ++t) {
        const Matrix y = g.matrix(20, 4), u = g.matrix(20, 2), v = g.stiefel(4, 2), sp = g.matrix(20, 4),
                     gam3 = g.matrix(20, 4);
        const double mu = g.uniform(0.1, 5), beta = g.uniform(0, 10);
        const Matrix e = update_e(y, u, v, sp, gam3, mu, beta);
        const Matrix grad = 2.0 * beta * e - mu * (y - u * v.transpose() - e - sp + gam3 / mu);
        EXPECT_LE(grad.cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(UpdateS, Limits) {
    testgen::Gen g(59);
    const Matrix y = g.matrix(20, 4), x = g.matrix(20, 4), e = g.matrix(20, 4), gam3 = g.matrix(20, 4);
    const double mu = 2.0;
    const Matrix r = y - x - e + gam3 / mu;
    EXPECT_TRUE(update_s(y, x, e, gam3, mu, mu * (r.cwiseAbs().maxCoeff() + 1.0)).isZero(0));
    EXPECT_EQ(update_s(y, x, e, gam3, mu, 0.0), r);
}

TEST(UpdateS, ElementwiseProx) {
    testgen::Gen g(60);
    const Matrix y = g.matrix(10, 3), u = g.matrix(10, 2), v = g.stiefel(3, 2), e = g.matrix(10, 3),
                 gam3 = g.matrix(10, 3);
    const double mu = 1.2, lambda = 0.7;
    const Matrix sp = update_s(y, u, v, e, gam3, mu, lambda);
    const Matrix r = y - u * v.transpose() - e + gam3 / mu;
    for (Eigen::Index k = 0; k < sp.size(); ++k) {
        const double f0 = scalar_prox_objective(sp(k), r(k), mu, lambda);
        for (double delta : {-1e-3, 1e-3, -0.1, 0.1})
            EXPECT_LE(f0, scalar_prox_objective(sp(k) + delta, r(k), mu, lambda) + 1e-15);
    }
}

// --- multipliers -----------------------------------------------------------

TEST(Multipliers, FeasibleStateOnlyGrowsMu) {
    testgen::Gen g(61);
    const PlaneShape s{4, 4};
    SolverState st = random_state(g, s, 5, 2);
    st.g1 = apply_diff(st.u, s, Direction::horizontal);
    st.g2 = apply_diff(st.u, s, Direction::vertical);
    const Matrix y = st.u * st.v.transpose() + st.e + st.s;
    const SolverState before = st;
    st.mu = 2.0;
    const Residuals r = update_multipliers(st, y, s, 1.25, 1e6);
    EXPECT_LE((st.gam1 - before.gam1).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((st.gam2 - before.gam2).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((st.gam3 - before.gam3).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_EQ(st.mu, 2.5);
    EXPECT_LE(r.fit, 1e-26);
}

TEST(Multipliers, SingleEntryResidual) {
    SolverState st;
    st.mu = 2.0;
    st.g1 = st.g2 = st.gam1 = st.gam2 = Matrix::Zero(3, 1);
    st.e = st.s = st.gam3 = Matrix::Zero(3, 2);
    Matrix y = Matrix::Zero(3, 2);
    y(1, 1) = 0.4;
    Matrix grad1 = Matrix::Zero(3, 1);
    grad1(2, 0) = -0.25;
    update_multipliers(st, y, Matrix::Zero(3, 2), grad1, Matrix::Zero(3, 1), 1.25, 1e6);
    EXPECT_EQ(st.gam3(1, 1), 0.8);
    EXPECT_EQ(st.gam1(2, 0), -0.5);
    EXPECT_EQ(st.gam3.cwiseAbs().sum(), 0.8);
}

TEST(Multipliers, PenaltyCap) {
    SolverState st;
    st.mu = 1e6;
    st.g1 = st.g2 = st.gam1 = st.gam2 = Matrix::Zero(2, 1);
    st.e = st.s = st.gam3 = Matrix::Zero(2, 1);
    update_multipliers(st, Matrix::Zero(2, 1), Matrix::Zero(2, 1), Matrix::Zero(2, 1), Matrix::Zero(2, 1), 1.25, 1e6);
    EXPECT_EQ(st.mu, 1e6);
    st.mu = 9e5;
    update_multipliers(st, Matrix::Zero(2, 1), Matrix::Zero(2, 1), Matrix::Zero(2, 1), Matrix::Zero(2, 1), 1.25, 1e6);
    EXPECT_EQ(st.mu, 1e6);
}

// --- config ----------------------------------------------------------------

TEST(Config, Presets) {
    const auto gauss = DenoiseConfig::gaussian(0.3, 4);
    EXPECT_EQ(gauss.beta, 1.0);
    EXPECT_EQ(gauss.lambda, 100.0);
    EXPECT_EQ(gauss.tau1, 0.3);
    EXPECT_EQ(gauss.tau2, 0.3);
    const auto mixed = DenoiseConfig::mixed(0.2);
    EXPECT_EQ(mixed.beta, 50.0);
    EXPECT_EQ(mixed.lambda, 1.0);
    const DenoiseConfig d;
    EXPECT_EQ(d.mu0, 1e-3);
    EXPECT_EQ(d.rho, 1.25);
    EXPECT_EQ(d.epsilon, 1e-6);
    EXPECT_EQ(d.tau1, 0.01);
    EXPECT_EQ(d.max_iter, 50);
    EXPECT_EQ(d.mu_max, 1e6);
}

TEST(Config, Validation) {
    DenoiseConfig c = DenoiseConfig::mixed(0.1, 2);
    EXPECT_NO_THROW(c.validate());
    auto bad = [&](auto mutate) {
        DenoiseConfig x = c;
        mutate(x);
        EXPECT_THROW(x.validate(), DomainError);
    };
    bad([](DenoiseConfig& x) { x.rank = 0; });
    bad([](DenoiseConfig& x) { x.tau1 = -1; });
    bad([](DenoiseConfig& x) { x.beta = -1; });
    bad([](DenoiseConfig& x) { x.lambda = std::nan(""); });
    bad([](DenoiseConfig& x) { x.mu0 = 0; });
    bad([](DenoiseConfig& x) { x.rho = 1.0; });
    bad([](DenoiseConfig& x) { x.epsilon = 0; });
    bad([](DenoiseConfig& x) { x.max_iter = 0; });
    bad([](DenoiseConfig& x) { x.mu_max = 1e-4; });
}

// --- driver ----------------------------------------------------------------

TEST(Solve, RejectsBadInputs) {
    testgen::Gen g(62);
    HsiCube c = g.cube(4, 4, 3);
    EXPECT_THROW(solve(c, DenoiseConfig::mixed(0.1, 4)), DomainError);
    c(1, 1, 1) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(solve(c, DenoiseConfig::mixed(0.1, 2)), DomainError);
}

TEST(Solve, CleanLowRankCubeIsRecovered) {
    const HsiCube clean = make_low_rank_cube({32, 32, 10, 3, 5});
    DenoiseConfig cfg = DenoiseConfig::mixed(1e-4, 3);
    const SolveResult res = solve(clean, cfg);
    EXPECT_LE(testgen::rel_err(res.restored.casorati(), clean.casorati()), 1e-3);
}

TEST(Solve, InvariantsAlongTheRun) {
    const HsiCube clean = make_low_rank_cube({16, 20, 8, 2, 9});
    const HsiCube noisy = apply_case(clean, "c", DatasetProfile::msi31, 3).first;
    DenoiseConfig cfg = DenoiseConfig::mixed(0.3, 3);
    cfg.check_descent = true;
    cfg.max_iter = 30;
    const SolveResult res = solve(noisy, cfg);
    ASSERT_EQ(res.diagnostics.size(), 30u);
    double mu = cfg.mu0;
    for (const auto& d : res.diagnostics) {
        EXPECT_TRUE(d.descent_ok) << "iteration " << d.iter << " worst " << d.descent_worst;
        EXPECT_LE(d.orth_err, 1e-8);
        EXPECT_LE(d.max_imag, 1e-9);
        EXPECT_GE(d.fit_res, 0.0);
        EXPECT_GE(d.split_res1, 0.0);
        EXPECT_GE(d.split_res2, 0.0);
        EXPECT_DOUBLE_EQ(d.mu, mu);
        mu = std::min(mu * cfg.rho, cfg.mu_max);
    }
    EXPECT_LE(orthonormality_error(res.state.v), 1e-8);
    EXPECT_TRUE(res.restored.all_finite());
}

TEST(Solve, Deterministic) {
    const HsiCube clean = make_low_rank_cube({12, 10, 6, 2, 4});
    const HsiCube noisy = apply_case(clean, "e", DatasetProfile::msi31, 8).first;
    const DenoiseConfig cfg = DenoiseConfig::gaussian(0.2, 2);
    const SolveResult a = solve(noisy, cfg), b = solve(noisy, cfg);
    EXPECT_EQ(a.restored, b.restored);
    ASSERT_EQ(a.diagnostics.size(), b.diagnostics.size());
    for (std::size_t k = 0; k < a.diagnostics.size(); ++k) {
        EXPECT_EQ(a.diagnostics[k].fit_res, b.diagnostics[k].fit_res);
        EXPECT_EQ(a.diagnostics[k].split_res1, b.diagnostics[k].split_res1);
        EXPECT_EQ(a.diagnostics[k].split_res2, b.diagnostics[k].split_res2);
        EXPECT_EQ(a.diagnostics[k].objective, b.diagnostics[k].objective);
        EXPECT_EQ(a.diagnostics[k].rel_change, b.diagnostics[k].rel_change);
    }
}

TEST(Solve, StopsAtToleranceOrRunsToCap) {
    const HsiCube clean = make_low_rank_cube({16, 16, 8, 2, 2});
    DenoiseConfig cfg = DenoiseConfig::mixed(0.1, 2);
    cfg.max_iter = 80;
    const SolveResult early = solve(clean, cfg);
    ASSERT_TRUE(early.converged);
    EXPECT_LT(early.diagnostics.size(), 80u);
    cfg.stop_on_convergence = false;
    const SolveResult full = solve(clean, cfg);
    EXPECT_EQ(full.diagnostics.size(), 80u);
}

TEST(Solve, DegeneratesToTruncatedSvd) {
    testgen::Gen g(63);
    for (int t = 0; t < 5; ++t) {
        const Matrix y = g.uniform_matrix(120, 3) * g.uniform_matrix(3, 8) + 0.01 * g.matrix(120, 8);
        DenoiseConfig cfg = DenoiseConfig::mixed(0.0, 3);
        cfg.beta = 1e12;
        cfg.lambda = 1e12;
        const SolveResult res = solve(HsiCube(12, 10, y), cfg);
        const auto f = truncated_svd_init(y, 3);
        EXPECT_LE(testgen::rel_err(res.restored.casorati(), f.u * f.v.transpose()), 1e-6);
    }
}

TEST(Solve, DegenerateLimitHoldsEarlyOnUnstructuredCubes) {
    // Without a spectral gap the truncated SVD is an unstable fixed point of
    // the iteration; the first iterations still reproduce it.
    testgen::Gen g(64);
    const HsiCube y = g.cube(10, 9, 6);
    DenoiseConfig cfg = DenoiseConfig::mixed(0.0, 3);
    cfg.beta = 1e12;
    cfg.lambda = 1e12;
    cfg.max_iter = 5;
    const auto f = truncated_svd_init(y.casorati(), 3);
    EXPECT_LE(testgen::rel_err(solve(y, cfg).restored.casorati(), f.u * f.v.transpose()), 1e-12);
}
