#pragma once

// Energy-threshold rank estimate for the low-rank factor: the smallest R
// whose leading singular values carry the requested fraction of ||Y||_F^2,
// clamped into a band-dependent window.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "rctv/linalg.hpp"

namespace rctv {

struct RankBounds {
    Eigen::Index lo = 0;
    Eigen::Index hi = 0;
};

/// [2, ceil(0.15 B)], widened so that lo <= hi and both lie in [1, B].
inline RankBounds default_rank_bounds(Eigen::Index bands) {
    const Eigen::Index lo = std::min<Eigen::Index>(2, bands);
    const auto hi = static_cast<Eigen::Index>(std::ceil(0.15 * static_cast<double>(bands)));
    return {lo, std::clamp(hi, lo, bands)};
}

struct RankEstimate {
    Eigen::Index rank = 0;     ///< after clamping
    Eigen::Index unclamped = 0; ///< smallest R reaching the energy fraction
    double captured = 0.0;      ///< energy fraction carried by the first `rank` values
};

inline RankEstimate estimate_rank_detailed(const Matrix& y, double energy_fraction = 0.995,
                                           std::optional<RankBounds> bounds = std::nullopt) {
    if (!(energy_fraction > 0.0 && energy_fraction <= 1.0)) {
        throw DomainError("estimate_rank: energy fraction must lie in (0, 1]");
    }
    const RankBounds bd = bounds.value_or(default_rank_bounds(y.cols()));
    if (bd.lo < 1 || bd.lo > bd.hi) throw DomainError("estimate_rank: invalid bounds");

    // Singular values only; the Gram route would square the condition number.
    const Vector sigma = Eigen::JacobiSVD<Matrix>(y).singularValues();
    const Vector energy = sigma.array().square();
    const double total = energy.sum();
    if (!(total > 0.0)) throw DomainError("estimate_rank: input is all zeros");

    RankEstimate est;
    double acc = 0.0;
    est.unclamped = energy.size();
    for (Eigen::Index k = 0; k < energy.size(); ++k) {
        acc += energy(k);
        if (acc >= energy_fraction * total) {
            est.unclamped = k + 1;
            break;
        }
    }
    est.rank = std::clamp(est.unclamped, bd.lo, bd.hi);
    est.captured = energy.head(std::min(est.rank, energy.size())).sum() / total;
    return est;
}

inline Eigen::Index estimate_rank(const Matrix& y, double energy_fraction = 0.995,
                                  std::optional<RankBounds> bounds = std::nullopt) {
    return estimate_rank_detailed(y, energy_fraction, bounds).rank;
}

} // namespace rctv
