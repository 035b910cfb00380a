#pragma once

// Hyperspectral cube value type, Casorati fold/unfold and band-wise min-max
// normalization.
//
// Storage is band-sequential with column-major planes: pixel (i, j) of band b
// lives at offset b*M*N + j*M + i. With this layout the in-memory buffer is
// exactly the column-major (M*N) x B Casorati matrix, so row k = j*M + i
// (0-based) is the spectrum of pixel (i, j).

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rctv/errors.hpp"

namespace rctv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class HsiCube {
public:
    HsiCube() = default;

    /// Zero-filled cube.
    HsiCube(std::size_t height, std::size_t width, std::size_t bands)
        : height_(height), width_(width), bands_(bands) {
        check_dims(height, width, bands);
        data_ = Matrix::Zero(static_cast<Eigen::Index>(height * width),
                             static_cast<Eigen::Index>(bands));
    }

    /// Takes ownership of a Casorati matrix with height*width rows.
    HsiCube(std::size_t height, std::size_t width, Matrix casorati)
        : height_(height), width_(width), bands_(static_cast<std::size_t>(casorati.cols())) {
        check_dims(height, width, bands_);
        if (static_cast<std::size_t>(casorati.rows()) != height * width) {
            throw DimensionError("Casorati matrix has " + std::to_string(casorati.rows()) +
                                 " rows, expected " + std::to_string(height * width));
        }
        data_ = std::move(casorati);
    }

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t bands() const noexcept { return bands_; }
    std::size_t pixels() const noexcept { return height_ * width_; }
    std::size_t size() const noexcept { return height_ * width_ * bands_; }

    double operator()(std::size_t i, std::size_t j, std::size_t b) const {
        return data_(index(i, j), static_cast<Eigen::Index>(b));
    }
    double& operator()(std::size_t i, std::size_t j, std::size_t b) {
        return data_(index(i, j), static_cast<Eigen::Index>(b));
    }

    /// Band b as an M x N view.
    Eigen::Map<const Matrix> band(std::size_t b) const {
        return {data_.col(static_cast<Eigen::Index>(b)).data(), rows(), cols()};
    }
    Eigen::Map<Matrix> band(std::size_t b) {
        return {data_.col(static_cast<Eigen::Index>(b)).data(), rows(), cols()};
    }

    /// Casorati view; column b is band b vectorized column-major.
    const Matrix& casorati() const noexcept { return data_; }
    Matrix& casorati() noexcept { return data_; }

    const double* data() const noexcept { return data_.data(); }
    double* data() noexcept { return data_.data(); }

    bool all_finite() const { return data_.allFinite(); }

    friend bool operator==(const HsiCube& a, const HsiCube& b) {
        return a.height_ == b.height_ && a.width_ == b.width_ && a.bands_ == b.bands_ &&
               a.data_ == b.data_;
    }

private:
    static void check_dims(std::size_t m, std::size_t n, std::size_t b) {
        if (m == 0 || n == 0 || b == 0) {
            throw DimensionError("cube dimensions must be positive, got " + std::to_string(m) +
                                 "x" + std::to_string(n) + "x" + std::to_string(b));
        }
        constexpr auto limit = static_cast<std::size_t>(std::numeric_limits<Eigen::Index>::max());
        if (m > limit / n || m * n > limit / b) {
            throw DimensionError("cube dimensions overflow");
        }
    }

    Eigen::Index index(std::size_t i, std::size_t j) const {
        return static_cast<Eigen::Index>(j * height_ + i);
    }
    Eigen::Index rows() const { return static_cast<Eigen::Index>(height_); }
    Eigen::Index cols() const { return static_cast<Eigen::Index>(width_); }

    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::size_t bands_ = 0;
    Matrix data_;
};

inline Matrix unfold_casorati(const HsiCube& cube) { return cube.casorati(); }

inline HsiCube fold_casorati(const Matrix& mat, std::size_t height, std::size_t width) {
    if (static_cast<std::size_t>(mat.rows()) != height * width) {
        throw DimensionError("fold_casorati: " + std::to_string(mat.rows()) + " rows cannot fold into " +
                             std::to_string(height) + "x" + std::to_string(width));
    }
    return HsiCube(height, width, mat);
}

struct BandRange {
    double min = 0.0;
    double max = 0.0;
    bool constant() const noexcept { return max == min; }
};

struct NormalizationRecord {
    std::vector<BandRange> bands;

    std::size_t constant_count() const {
        std::size_t n = 0;
        for (const auto& b : bands) n += b.constant() ? 1 : 0;
        return n;
    }
};

/// Maps every band affinely onto [0, 1]. Constant bands become all-zero and
/// are flagged in the record instead of failing.
inline std::pair<HsiCube, NormalizationRecord> normalize_bands(const HsiCube& cube) {
    NormalizationRecord rec;
    rec.bands.reserve(cube.bands());
    HsiCube out = cube;
    for (std::size_t b = 0; b < cube.bands(); ++b) {
        auto col = out.casorati().col(static_cast<Eigen::Index>(b));
        const BandRange r{col.minCoeff(), col.maxCoeff()};
        if (r.constant()) {
            col.setZero();
        } else {
            const double span = r.max - r.min;
            col = ((col.array() - r.min) / span).matrix();
        }
        rec.bands.push_back(r);
    }
    return {std::move(out), std::move(rec)};
}

inline HsiCube denormalize_bands(const HsiCube& cube, const NormalizationRecord& rec) {
    if (rec.bands.size() != cube.bands()) {
        throw DimensionError("normalization record has " + std::to_string(rec.bands.size()) +
                             " bands, cube has " + std::to_string(cube.bands()));
    }
    HsiCube out = cube;
    for (std::size_t b = 0; b < cube.bands(); ++b) {
        auto col = out.casorati().col(static_cast<Eigen::Index>(b));
        const auto& r = rec.bands[b];
        if (r.constant()) {
            col.setConstant(r.min);
        } else {
            col = (col.array() * (r.max - r.min) + r.min).matrix();
        }
    }
    return out;
}

} // namespace rctv
