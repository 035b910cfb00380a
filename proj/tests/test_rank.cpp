#include <gtest/gtest.h>

#include <rctv/rank.hpp>

#include "support.hpp"

using namespace rctv;

TEST(DefaultBounds, FollowBandCount) {
    EXPECT_EQ(default_rank_bounds(31).lo, 2);
    EXPECT_EQ(default_rank_bounds(31).hi, 5);
    EXPECT_EQ(default_rank_bounds(160).hi, 24);
    EXPECT_EQ(default_rank_bounds(10).hi, 2);
    EXPECT_EQ(default_rank_bounds(1).lo, 1);
    EXPECT_EQ(default_rank_bounds(1).hi, 1);
}

TEST(EstimateRank, ExactRankThree) {
    testgen::Gen g(1);
    const Matrix y = g.low_rank(200, 40, 3);
    for (double f : {0.5, 0.9, 0.99, 0.999999}) {
        const auto est = estimate_rank_detailed(y, f, RankBounds{1, 40});
        EXPECT_LE(est.unclamped, 3) << f;
    }
    EXPECT_EQ(estimate_rank(y, 0.999999, RankBounds{1, 40}), 3);
    EXPECT_EQ(estimate_rank(y, 0.999999), 3);
}

TEST(EstimateRank, IdentityWithEqualEnergy) {
    const Matrix eye = Matrix::Identity(10, 10);
    EXPECT_EQ(estimate_rank(eye, 0.35, RankBounds{2, 10}), 4);
    // default bounds for B = 10 are [2, 2]
    const auto est = estimate_rank_detailed(eye, 0.35);
    EXPECT_EQ(est.unclamped, 4);
    EXPECT_EQ(est.rank, 2);
    EXPECT_NEAR(est.captured, 0.2, 1e-12);
}

TEST(EstimateRank, ClampsHighRankSignal) {
    testgen::Gen g(2);
    const Matrix y = g.low_rank(400, 31, 31);
    const auto est = estimate_rank_detailed(y, 0.995);
    EXPECT_GT(est.unclamped, 5);
    EXPECT_EQ(est.rank, 5);
}

TEST(EstimateRank, FullFractionNeedsEveryValue) {
    testgen::Gen g(3);
    const Matrix y = g.matrix(30, 6);
    EXPECT_EQ(estimate_rank(y, 1.0, RankBounds{1, 6}), 6);
}

TEST(EstimateRank, MonotoneInFraction) {
    testgen::Gen g(4);
    for (int t = 0; t < 20; ++t) {
        const Matrix y = g.matrix(40, 12);
        Eigen::Index last = 0;
        for (double f = 0.05; f <= 1.0; f += 0.05) {
            const Eigen::Index r = estimate_rank_detailed(y, f, RankBounds{1, 12}).unclamped;
            EXPECT_GE(r, last);
            last = r;
        }
    }
}

TEST(EstimateRank, Errors) {
    EXPECT_THROW(estimate_rank(Matrix::Zero(5, 3)), DomainError);
    const Matrix y = Matrix::Identity(4, 4);
    EXPECT_THROW(estimate_rank(y, 0.0), DomainError);
    EXPECT_THROW(estimate_rank(y, 1.5), DomainError);
    EXPECT_THROW(estimate_rank(y, 0.9, RankBounds{3, 2}), DomainError);
    EXPECT_THROW(estimate_rank(y, 0.9, RankBounds{0, 2}), DomainError);
}
