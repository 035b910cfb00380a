#pragma once

// Quality indices for restored cubes: band-averaged PSNR and SSIM, ERGAS and
// mean spectral angle, plus the column-mean profile used to inspect stripe
// artifacts on real data without a reference.

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "rctv/cube.hpp"
#include "rctv/linalg.hpp"

namespace rctv {

namespace detail {

inline void check_same_dims(const HsiCube& a, const HsiCube& b, const char* what) {
    if (a.height() != b.height() || a.width() != b.width() || a.bands() != b.bands()) {
        throw DimensionError(std::string(what) + ": cube dimensions differ");
    }
}

template <typename A, typename B>
void check_same_plane(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError(std::string(what) + ": band dimensions differ");
    }
}

} // namespace detail

/// 10 log10(peak^2 / MSE); +infinity for identical bands.
template <typename A, typename B>
double psnr_band(const Eigen::MatrixBase<A>& ref, const Eigen::MatrixBase<B>& test, double peak = 1.0) {
    detail::check_same_plane(ref, test, "psnr_band");
    if (!(peak > 0.0)) throw DomainError("psnr_band: peak must be positive");
    const double mse = (ref - test).squaredNorm() / static_cast<double>(ref.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

inline std::vector<double> per_band_psnr(const HsiCube& ref, const HsiCube& test, double peak = 1.0) {
    detail::check_same_dims(ref, test, "psnr");
    std::vector<double> out(ref.bands());
    for (std::size_t b = 0; b < ref.bands(); ++b) out[b] = psnr_band(ref.band(b), test.band(b), peak);
    return out;
}

inline double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double mpsnr(const HsiCube& ref, const HsiCube& test, double peak = 1.0) {
    return mean_of(per_band_psnr(ref, test, peak));
}

struct SsimOptions {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double peak = 1.0;
};

/// 1-D Gaussian taps summing to one; the SSIM window is taps * taps^T.
inline Vector gaussian_taps(int size, double sigma) {
    Vector g(size);
    const double c = 0.5 * (size - 1);
    for (int k = 0; k < size; ++k) {
        const double d = k - c;
        g(k) = std::exp(-d * d / (2.0 * sigma * sigma));
    }
    return g / g.sum();
}

namespace detail {

/// "Valid" correlation of an M x N plane with the separable kernel g g^T.
inline Matrix filter_valid(const Matrix& x, const Vector& g) {
    const Eigen::Index w = g.size();
    const Eigen::Index m = x.rows() - w + 1, n = x.cols() - w + 1;
    Matrix rows_done(m, x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        for (Eigen::Index i = 0; i < m; ++i) rows_done(i, j) = g.dot(x.col(j).segment(i, w));
    Matrix out(m, n);
    for (Eigen::Index j = 0; j < n; ++j) out.col(j) = rows_done.middleCols(j, w) * g;
    return out;
}

} // namespace detail

/// Mean local SSIM over all window positions fully inside the band.
template <typename A, typename B>
double ssim_band(const Eigen::MatrixBase<A>& ref, const Eigen::MatrixBase<B>& test, const SsimOptions& opt = {}) {
    detail::check_same_plane(ref, test, "ssim_band");
    if (ref.rows() < opt.window || ref.cols() < opt.window) {
        throw DimensionError("ssim_band: band " + std::to_string(ref.rows()) + "x" + std::to_string(ref.cols()) +
                             " smaller than the " + std::to_string(opt.window) + "x" +
                             std::to_string(opt.window) + " window");
    }
    const Vector g = gaussian_taps(opt.window, opt.sigma);
    const Matrix x = ref, y = test;
    const double c1 = (opt.k1 * opt.peak) * (opt.k1 * opt.peak);
    const double c2 = (opt.k2 * opt.peak) * (opt.k2 * opt.peak);
    const Matrix mx = detail::filter_valid(x, g);
    const Matrix my = detail::filter_valid(y, g);
    const Matrix sxx = detail::filter_valid(x.cwiseProduct(x), g) - mx.cwiseProduct(mx);
    const Matrix syy = detail::filter_valid(y.cwiseProduct(y), g) - my.cwiseProduct(my);
    const Matrix sxy = detail::filter_valid(x.cwiseProduct(y), g) - mx.cwiseProduct(my);
    const auto num = (2.0 * mx.cwiseProduct(my).array() + c1) * (2.0 * sxy.array() + c2);
    const auto den = (mx.array().square() + my.array().square() + c1) * (sxx.array() + syy.array() + c2);
    return (num / den).mean();
}

inline std::vector<double> per_band_ssim(const HsiCube& ref, const HsiCube& test, const SsimOptions& opt = {}) {
    detail::check_same_dims(ref, test, "ssim");
    std::vector<double> out(ref.bands());
    for (std::size_t b = 0; b < ref.bands(); ++b) out[b] = ssim_band(ref.band(b), test.band(b), opt);
    return out;
}

inline double mssim(const HsiCube& ref, const HsiCube& test, const SsimOptions& opt = {}) {
    return mean_of(per_band_ssim(ref, test, opt));
}

struct ErgasResult {
    double value = 0.0;
    std::size_t excluded_bands = 0; ///< bands whose reference mean is zero
};

/// 100 sqrt( (1/B) sum_b RMSE_b^2 / mean_b^2 ) over bands with nonzero mean.
inline ErgasResult ergas_detailed(const HsiCube& ref, const HsiCube& test) {
    detail::check_same_dims(ref, test, "ergas");
    double acc = 0.0;
    std::size_t used = 0;
    ErgasResult r;
    const auto np = static_cast<double>(ref.pixels());
    for (std::size_t b = 0; b < ref.bands(); ++b) {
        const auto rb = ref.casorati().col(static_cast<Eigen::Index>(b));
        const auto tb = test.casorati().col(static_cast<Eigen::Index>(b));
        const double mean = rb.sum() / np;
        if (mean == 0.0) {
            ++r.excluded_bands;
            continue;
        }
        const double mse = (rb - tb).squaredNorm() / np;
        acc += mse / (mean * mean);
        ++used;
    }
    if (used == 0) throw DomainError("ergas: every reference band has zero mean");
    r.value = 100.0 * std::sqrt(acc / static_cast<double>(used));
    return r;
}

inline double ergas(const HsiCube& ref, const HsiCube& test) { return ergas_detailed(ref, test).value; }

struct MsamResult {
    double value = 0.0;             ///< radians
    std::size_t excluded_pixels = 0; ///< pixels where either spectrum is zero
};

inline MsamResult msam_detailed(const HsiCube& ref, const HsiCube& test) {
    detail::check_same_dims(ref, test, "msam");
    const Matrix& x = ref.casorati();
    const Matrix& y = test.casorati();
    MsamResult r;
    double acc = 0.0;
    std::size_t used = 0;
    for (Eigen::Index p = 0; p < x.rows(); ++p) {
        if (x.row(p).squaredNorm() == 0.0 || y.row(p).squaredNorm() == 0.0) {
            ++r.excluded_pixels;
            continue;
        }
        acc += vector_angle(x.row(p), y.row(p));
        ++used;
    }
    if (used == 0) throw DomainError("msam: every pixel spectrum has zero norm");
    r.value = acc / static_cast<double>(used);
    return r;
}

inline double msam(const HsiCube& ref, const HsiCube& test) { return msam_detailed(ref, test).value; }

/// Mean of each image column of one band (length N).
inline Vector column_mean_profile(const HsiCube& cube, std::size_t band) {
    if (band >= cube.bands()) {
        throw DomainError("column_mean_profile: band " + std::to_string(band) + " out of range");
    }
    return cube.band(band).colwise().mean().transpose();
}

struct MetricsReport {
    double mpsnr = 0.0;
    double mssim = 0.0;
    double ergas = 0.0;
    double msam = 0.0;
    std::vector<double> per_band_psnr;
    std::vector<double> per_band_ssim;
    std::size_t ergas_excluded_bands = 0;
    std::size_t msam_excluded_pixels = 0;
    double wall_ms = 0.0;
};

inline MetricsReport evaluate(const HsiCube& ref, const HsiCube& test, const SsimOptions& opt = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    MetricsReport rep;
    rep.per_band_psnr = per_band_psnr(ref, test, opt.peak);
    rep.per_band_ssim = per_band_ssim(ref, test, opt);
    rep.mpsnr = mean_of(rep.per_band_psnr);
    rep.mssim = mean_of(rep.per_band_ssim);
    const auto e = ergas_detailed(ref, test);
    rep.ergas = e.value;
    rep.ergas_excluded_bands = e.excluded_bands;
    const auto s = msam_detailed(ref, test);
    rep.msam = s.value;
    rep.msam_excluded_pixels = s.excluded_pixels;
    rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

} // namespace rctv
