#pragma once

// Mixed-noise simulation for band-normalized cubes: i.i.d. Gaussian noise,
// salt-and-pepper impulses, deadlines (zeroed full-height column runs) and
// stripes (constant column offsets), composed into the six benchmark cases
// (a)-(f).
//
// Every stochastic choice made by apply_case is written to a NoiseRecord
// first; the cube is then produced by apply_record, so replaying a record
// reproduces the corrupted cube bit for bit. Band and column indices are
// 0-based throughout.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rctv/cube.hpp"
#include "rctv/rng.hpp"

namespace rctv {

struct ValueRange {
    double lo = 0.0;
    double hi = 0.0;
    bool fixed() const noexcept { return lo == hi; }
    double draw(Rng& rng) const { return fixed() ? lo : rng.uniform(lo, hi); }
};

struct CountRange {
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    std::int64_t draw(Rng& rng) const { return rng.uniform_int(lo, hi); }
};

struct BandWindow {
    std::size_t first = 0; ///< inclusive
    std::size_t last = 0;  ///< inclusive
};

struct DeadlineSpec {
    BandWindow bands;
    CountRange count;
    CountRange width;
};

struct StripeSpec {
    BandWindow bands;
    CountRange count;
    double amplitude = 0.25; ///< offsets are uniform in [-amplitude, amplitude]
    std::optional<ValueRange> clamp; ///< clamp striped columns into this range
};

struct NoiseSpec {
    ValueRange gaussian_sigma;
    ValueRange impulse_ratio;
    std::optional<DeadlineSpec> deadlines;
    std::optional<StripeSpec> stripes;
    std::uint64_t seed = 0;
};

struct Deadline {
    std::size_t column = 0; ///< first zeroed column
    std::size_t width = 0;
    friend bool operator==(const Deadline&, const Deadline&) = default;
};

struct Stripe {
    std::size_t column = 0;
    double offset = 0.0;
    friend bool operator==(const Stripe&, const Stripe&) = default;
};

struct BandNoise {
    double sigma = 0.0;
    double impulse_ratio = 0.0;
    std::uint64_t gaussian_seed = 0;
    std::uint64_t impulse_seed = 0;
    std::vector<Deadline> deadlines;
    std::vector<Stripe> stripes;
    friend bool operator==(const BandNoise&, const BandNoise&) = default;
};

struct NoiseRecord {
    std::string case_id;
    std::string profile;
    std::uint64_t seed = 0;
    std::size_t height = 0, width = 0, bands = 0;
    bool windows_rescaled = false;  ///< profile windows scaled to a band count other than the reference
    bool structures_clamped = false; ///< drawn deadline/stripe sets were trimmed to fit the width
    std::optional<ValueRange> stripe_clamp;
    std::vector<BandNoise> band_noise;
    friend bool operator==(const NoiseRecord&, const NoiseRecord&) = default;
};

// ---------------------------------------------------------------------------
// Per-band primitives

namespace detail {

inline void check_window(const BandWindow& w, std::size_t bands) {
    if (w.first > w.last || w.last >= bands) {
        throw DomainError("band window [" + std::to_string(w.first) + ", " + std::to_string(w.last) +
                          "] invalid for " + std::to_string(bands) + " bands");
    }
}

inline void check_count(const CountRange& c, const char* what) {
    if (c.lo < 0 || c.lo > c.hi) throw DomainError(std::string(what) + " range is not well-ordered");
}

/// k distinct values from [0, n), in draw order (partial Fisher-Yates).
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t t = 0; t < k; ++t) {
        const auto j = t + static_cast<std::size_t>(rng.below(n - t));
        std::swap(idx[t], idx[j]);
    }
    idx.resize(k);
    return idx;
}

} // namespace detail

inline void gaussian_band(Eigen::Ref<Vector> band, double sigma, Rng& rng) {
    if (sigma == 0.0) return;
    for (Eigen::Index k = 0; k < band.size(); ++k) band(k) += sigma * rng.normal();
}

/// Sets floor(ratio * size) distinct entries to 0 or 1 with equal probability.
inline std::size_t impulse_band(Eigen::Ref<Vector> band, double ratio, Rng& rng) {
    const auto n = static_cast<std::size_t>(band.size());
    const auto count = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
    if (count == 0) return 0;
    for (std::size_t k : detail::sample_without_replacement(n, count, rng)) {
        band(static_cast<Eigen::Index>(k)) = rng.coin() ? 1.0 : 0.0;
    }
    return count;
}

inline void apply_deadlines(HsiCube& cube, std::size_t band, const std::vector<Deadline>& lines) {
    auto plane = cube.band(band);
    for (const auto& d : lines) {
        if (d.column + d.width > cube.width()) throw DomainError("deadline exceeds image width");
        plane.middleCols(static_cast<Eigen::Index>(d.column), static_cast<Eigen::Index>(d.width)).setZero();
    }
}

inline void apply_stripes(HsiCube& cube, std::size_t band, const std::vector<Stripe>& stripes,
                          const std::optional<ValueRange>& clamp = std::nullopt) {
    auto plane = cube.band(band);
    for (const auto& s : stripes) {
        if (s.column >= cube.width()) throw DomainError("stripe column exceeds image width");
        auto col = plane.col(static_cast<Eigen::Index>(s.column));
        col.array() += s.offset;
        if (clamp) col = col.cwiseMax(clamp->lo).cwiseMin(clamp->hi);
    }
}

/// Draws a count and widths, trims trailing deadlines until the total width
/// fits, then places them at uniformly random non-overlapping positions.
/// Sets *trimmed when deadlines were dropped.
inline std::vector<Deadline> draw_deadlines(const DeadlineSpec& spec, std::size_t width, Rng& rng,
                                            bool* trimmed = nullptr) {
    std::vector<std::size_t> widths(static_cast<std::size_t>(spec.count.draw(rng)));
    for (auto& w : widths) w = static_cast<std::size_t>(spec.width.draw(rng));
    std::size_t total = std::accumulate(widths.begin(), widths.end(), std::size_t{0});
    while (total > width) {
        total -= widths.back();
        widths.pop_back();
        if (trimmed) *trimmed = true;
    }
    const std::size_t c = widths.size();
    const std::size_t free_cols = width - total;
    // Stars and bars: choose c of free_cols + c slots; slot p_k leaves
    // p_k - k free columns before deadline k.
    auto slots = detail::sample_without_replacement(free_cols + c, c, rng);
    std::sort(slots.begin(), slots.end());
    std::vector<Deadline> out(c);
    std::size_t used = 0;
    for (std::size_t k = 0; k < c; ++k) {
        out[k] = {slots[k] - k + used, widths[k]};
        used += widths[k];
    }
    return out;
}

inline std::vector<Stripe> draw_stripes(const StripeSpec& spec, std::size_t width, Rng& rng,
                                        bool* trimmed = nullptr) {
    auto count = static_cast<std::size_t>(spec.count.draw(rng));
    if (count > width) {
        count = width;
        if (trimmed) *trimmed = true;
    }
    std::vector<Stripe> out;
    out.reserve(count);
    for (std::size_t col : detail::sample_without_replacement(width, count, rng)) {
        out.push_back({col, rng.uniform(-spec.amplitude, spec.amplitude)});
    }
    std::sort(out.begin(), out.end(), [](const Stripe& a, const Stripe& b) { return a.column < b.column; });
    return out;
}

// ---------------------------------------------------------------------------
// Cube-level operations driven by a caller-owned Rng

/// Adds N(0, sigma_b^2) noise; sigma_b is drawn once per band when the range
/// is not degenerate. Returns the realized per-band sigmas.
inline std::pair<HsiCube, std::vector<double>> add_gaussian(const HsiCube& cube, ValueRange sigma, Rng& rng) {
    if (!(sigma.lo >= 0.0) || sigma.lo > sigma.hi) throw DomainError("add_gaussian: sigma must be >= 0");
    HsiCube out = cube;
    std::vector<double> realized;
    for (std::size_t b = 0; b < cube.bands(); ++b) {
        const double s = sigma.draw(rng);
        gaussian_band(out.casorati().col(static_cast<Eigen::Index>(b)), s, rng);
        realized.push_back(s);
    }
    return {std::move(out), std::move(realized)};
}

inline std::pair<HsiCube, std::vector<double>> add_impulse(const HsiCube& cube, ValueRange ratio, Rng& rng) {
    if (!(ratio.lo >= 0.0) || ratio.lo > ratio.hi || ratio.hi > 1.0) {
        throw DomainError("add_impulse: ratio must lie in [0, 1]");
    }
    HsiCube out = cube;
    std::vector<double> realized;
    for (std::size_t b = 0; b < cube.bands(); ++b) {
        const double s = ratio.draw(rng);
        impulse_band(out.casorati().col(static_cast<Eigen::Index>(b)), s, rng);
        realized.push_back(s);
    }
    return {std::move(out), std::move(realized)};
}

inline void validate(const DeadlineSpec& spec, std::size_t width, std::size_t bands) {
    detail::check_window(spec.bands, bands);
    detail::check_count(spec.count, "deadline count");
    detail::check_count(spec.width, "deadline width");
    if (spec.width.lo < 1) throw DomainError("deadline width must be at least 1");
    if (static_cast<std::size_t>(spec.width.hi) > width) {
        throw DomainError("deadline width range exceeds image width " + std::to_string(width));
    }
}

inline void validate(const StripeSpec& spec, std::size_t bands) {
    detail::check_window(spec.bands, bands);
    detail::check_count(spec.count, "stripe count");
    if (!(spec.amplitude >= 0.0)) throw DomainError("stripe amplitude must be non-negative");
    if (spec.clamp && !(spec.clamp->lo <= spec.clamp->hi)) throw DomainError("stripe clamp range is not well-ordered");
}

/// Returns the corrupted cube and the deadlines placed in each band of the
/// window (index 0 is spec.bands.first).
inline std::pair<HsiCube, std::vector<std::vector<Deadline>>> add_deadlines(const HsiCube& cube,
                                                                             const DeadlineSpec& spec, Rng& rng) {
    validate(spec, cube.width(), cube.bands());
    HsiCube out = cube;
    std::vector<std::vector<Deadline>> placed;
    for (std::size_t b = spec.bands.first; b <= spec.bands.last; ++b) {
        placed.push_back(draw_deadlines(spec, cube.width(), rng));
        apply_deadlines(out, b, placed.back());
    }
    return {std::move(out), std::move(placed)};
}

inline std::pair<HsiCube, std::vector<std::vector<Stripe>>> add_stripes(const HsiCube& cube,
                                                                         const StripeSpec& spec, Rng& rng) {
    validate(spec, cube.bands());
    HsiCube out = cube;
    std::vector<std::vector<Stripe>> placed;
    for (std::size_t b = spec.bands.first; b <= spec.bands.last; ++b) {
        placed.push_back(draw_stripes(spec, cube.width(), rng));
        apply_stripes(out, b, placed.back(), spec.clamp);
    }
    return {std::move(out), std::move(placed)};
}

// ---------------------------------------------------------------------------
// Records and the benchmark cases

namespace stream {
inline constexpr std::uint64_t gaussian = 1;
inline constexpr std::uint64_t impulse = 2;
inline constexpr std::uint64_t band_params = 3;
inline constexpr std::uint64_t deadlines = 4;
inline constexpr std::uint64_t stripes = 5;
} // namespace stream

/// Applies a record to a clean cube: per band Gaussian, then impulse, then
/// deadlines, then stripes.
inline HsiCube apply_record(const HsiCube& clean, const NoiseRecord& rec) {
    if (rec.band_noise.size() != clean.bands() || rec.height != clean.height() || rec.width != clean.width()) {
        throw DimensionError("noise record does not match cube dimensions");
    }
    HsiCube out = clean;
    for (std::size_t b = 0; b < clean.bands(); ++b) {
        const auto& bn = rec.band_noise[b];
        auto col = out.casorati().col(static_cast<Eigen::Index>(b));
        Rng g(bn.gaussian_seed);
        gaussian_band(col, bn.sigma, g);
        Rng s(bn.impulse_seed);
        impulse_band(col, bn.impulse_ratio, s);
        apply_deadlines(out, b, bn.deadlines);
        apply_stripes(out, b, bn.stripes, rec.stripe_clamp);
    }
    return out;
}

/// Draws every random choice of a NoiseSpec into a record without touching
/// any pixel data.
inline NoiseRecord draw_record(const NoiseSpec& spec, std::size_t height, std::size_t width, std::size_t bands) {
    if (!(spec.gaussian_sigma.lo >= 0.0) || spec.gaussian_sigma.lo > spec.gaussian_sigma.hi) {
        throw DomainError("gaussian sigma range invalid");
    }
    if (!(spec.impulse_ratio.lo >= 0.0) || spec.impulse_ratio.lo > spec.impulse_ratio.hi ||
        spec.impulse_ratio.hi > 1.0) {
        throw DomainError("impulse ratio range must lie in [0, 1]");
    }
    if (spec.deadlines) validate(*spec.deadlines, width, bands);
    if (spec.stripes) validate(*spec.stripes, bands);

    NoiseRecord rec;
    rec.seed = spec.seed;
    rec.height = height;
    rec.width = width;
    rec.bands = bands;
    rec.band_noise.resize(bands);
    if (spec.stripes) rec.stripe_clamp = spec.stripes->clamp;

    Rng params(derive_seed(spec.seed, stream::band_params));
    for (std::size_t b = 0; b < bands; ++b) {
        auto& bn = rec.band_noise[b];
        bn.sigma = spec.gaussian_sigma.draw(params);
        bn.impulse_ratio = spec.impulse_ratio.draw(params);
        bn.gaussian_seed = derive_seed(spec.seed, stream::gaussian, b);
        bn.impulse_seed = derive_seed(spec.seed, stream::impulse, b);
    }
    if (spec.deadlines) {
        Rng rng(derive_seed(spec.seed, stream::deadlines));
        for (std::size_t b = spec.deadlines->bands.first; b <= spec.deadlines->bands.last; ++b) {
            rec.band_noise[b].deadlines = draw_deadlines(*spec.deadlines, width, rng, &rec.structures_clamped);
        }
    }
    if (spec.stripes) {
        Rng rng(derive_seed(spec.seed, stream::stripes));
        for (std::size_t b = spec.stripes->bands.first; b <= spec.stripes->bands.last; ++b) {
            rec.band_noise[b].stripes = draw_stripes(*spec.stripes, width, rng, &rec.structures_clamped);
        }
    }
    return rec;
}

enum class DatasetProfile { msi31, hsi160 };

inline std::string to_string(DatasetProfile p) { return p == DatasetProfile::msi31 ? "msi31" : "hsi160"; }

inline DatasetProfile parse_profile(const std::string& s) {
    if (s == "msi31") return DatasetProfile::msi31;
    if (s == "hsi160") return DatasetProfile::hsi160;
    throw DomainError("unknown dataset profile \"" + s + "\" (expected msi31 or hsi160)");
}

struct ProfileWindows {
    std::size_t reference_bands;
    std::size_t deadline_first, deadline_last; ///< 1-based, inclusive
    CountRange deadline_count, deadline_width;
    std::size_t stripe_first, stripe_last; ///< 1-based, inclusive
    CountRange stripe_count;
};

inline ProfileWindows profile_windows(DatasetProfile p) {
    if (p == DatasetProfile::msi31) return {31, 11, 20, {5, 55}, {1, 5}, 21, 30, {50, 100}};
    return {160, 91, 130, {3, 10}, {1, 3}, 141, 160, {20, 40}};
}

/// Maps a 1-based inclusive window of the reference band count onto a
/// 0-based window of `bands`. Kept verbatim when bands == ref, or when
/// bands > ref and the profile accepts larger cubes.
inline BandWindow scale_window(std::size_t first1, std::size_t last1, std::size_t ref, std::size_t bands,
                               bool accepts_larger, bool* rescaled) {
    if (bands == ref || (accepts_larger && bands > ref)) return {first1 - 1, last1 - 1};
    *rescaled = true;
    const double f = static_cast<double>(bands) / static_cast<double>(ref);
    auto lo = static_cast<std::size_t>(std::lround(static_cast<double>(first1 - 1) * f));
    auto hi = static_cast<std::size_t>(std::lround(static_cast<double>(last1) * f));
    lo = std::min(lo, bands - 1);
    hi = std::clamp<std::size_t>(hi, lo + 1, bands) - 1;
    return {lo, hi};
}

inline bool is_case_id(const std::string& c) { return c.size() == 1 && c[0] >= 'a' && c[0] <= 'f'; }

/// Stripe settings the benchmark cases leave open.
struct CaseOptions {
    double stripe_amplitude = 0.25;
    std::optional<ValueRange> stripe_clamp;
};

/// The NoiseSpec of benchmark case a-f for a cube with `bands` bands.
inline NoiseSpec case_spec(const std::string& case_id, DatasetProfile profile, std::size_t bands,
                           std::uint64_t seed, bool* rescaled = nullptr, const CaseOptions& opts = {}) {
    if (!is_case_id(case_id)) throw DomainError("unknown noise case \"" + case_id + "\" (expected a-f)");
    bool scaled = false;
    const auto w = profile_windows(profile);
    const bool larger_ok = profile == DatasetProfile::hsi160;
    NoiseSpec spec;
    spec.seed = seed;
    const char c = case_id[0];
    switch (c) {
    case 'a':
    case 'b':
        spec.gaussian_sigma = {0.1, 0.1};
        break;
    case 'c':
    case 'd':
        spec.gaussian_sigma = {0.075, 0.075};
        spec.impulse_ratio = {0.1, 0.1};
        break;
    default: // e, f
        spec.gaussian_sigma = {0.05, 0.15};
        spec.impulse_ratio = {0.05, 0.15};
        break;
    }
    if (c == 'b' || c == 'd' || c == 'e' || c == 'f') {
        spec.deadlines = DeadlineSpec{scale_window(w.deadline_first, w.deadline_last, w.reference_bands, bands, larger_ok, &scaled),
                                      w.deadline_count, w.deadline_width};
    }
    if (c == 'f') {
        StripeSpec st;
        st.bands = scale_window(w.stripe_first, w.stripe_last, w.reference_bands, bands, larger_ok, &scaled);
        st.count = w.stripe_count;
        st.amplitude = opts.stripe_amplitude;
        st.clamp = opts.stripe_clamp;
        spec.stripes = st;
    }
    if (rescaled) *rescaled = scaled;
    return spec;
}

inline std::pair<HsiCube, NoiseRecord> apply_case(const HsiCube& clean, const std::string& case_id,
                                                  DatasetProfile profile, std::uint64_t seed,
                                                  const CaseOptions& opts = {}) {
    bool rescaled = false;
    const NoiseSpec spec = case_spec(case_id, profile, clean.bands(), seed, &rescaled, opts);
    NoiseRecord rec = draw_record(spec, clean.height(), clean.width(), clean.bands());
    rec.case_id = case_id;
    rec.profile = to_string(profile);
    rec.windows_rescaled = rescaled;
    HsiCube noisy = apply_record(clean, rec);
    return {std::move(noisy), std::move(rec)};
}

} // namespace rctv
