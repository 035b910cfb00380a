#pragma once

// JSON and CSV encodings of records, reports, configs and diagnostics.
// Non-finite doubles are written as the strings "inf", "-inf" and "nan",
// since JSON numbers cannot carry them.

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rctv/metrics.hpp"
#include "rctv/noise.hpp"
#include "rctv/solver.hpp"

namespace rctv {

using Json = nlohmann::ordered_json;

inline Json real_to_json(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline double real_from_json(const Json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw FormatError("expected a number or one of \"inf\", \"-inf\", \"nan\"");
}

/// Shortest round-tripping decimal form, with the same sentinels.
inline std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// ---------------------------------------------------------------------------
// NoiseRecord

inline Json to_json(const NoiseRecord& rec) {
    Json j;
    j["case"] = rec.case_id;
    j["profile"] = rec.profile;
    j["seed"] = rec.seed;
    j["height"] = rec.height;
    j["width"] = rec.width;
    j["bands"] = rec.bands;
    j["windows_rescaled"] = rec.windows_rescaled;
    j["structures_clamped"] = rec.structures_clamped;
    j["stripe_clamp"] = rec.stripe_clamp ? Json::array({rec.stripe_clamp->lo, rec.stripe_clamp->hi}) : Json();
    Json bands = Json::array();
    for (const auto& bn : rec.band_noise) {
        Json b;
        b["sigma"] = bn.sigma;
        b["impulse_ratio"] = bn.impulse_ratio;
        b["gaussian_seed"] = bn.gaussian_seed;
        b["impulse_seed"] = bn.impulse_seed;
        b["deadlines"] = Json::array();
        for (const auto& d : bn.deadlines) b["deadlines"].push_back({d.column, d.width});
        b["stripes"] = Json::array();
        for (const auto& s : bn.stripes) b["stripes"].push_back({s.column, s.offset});
        bands.push_back(std::move(b));
    }
    j["band_noise"] = std::move(bands);
    return j;
}

inline NoiseRecord noise_record_from_json(const Json& j) {
    try {
        NoiseRecord rec;
        rec.case_id = j.at("case").get<std::string>();
        rec.profile = j.at("profile").get<std::string>();
        rec.seed = j.at("seed").get<std::uint64_t>();
        rec.height = j.at("height").get<std::size_t>();
        rec.width = j.at("width").get<std::size_t>();
        rec.bands = j.at("bands").get<std::size_t>();
        rec.windows_rescaled = j.at("windows_rescaled").get<bool>();
        rec.structures_clamped = j.at("structures_clamped").get<bool>();
        if (const auto& c = j.at("stripe_clamp"); !c.is_null()) {
            rec.stripe_clamp = ValueRange{c.at(0).get<double>(), c.at(1).get<double>()};
        }
        for (const auto& b : j.at("band_noise")) {
            BandNoise bn;
            bn.sigma = b.at("sigma").get<double>();
            bn.impulse_ratio = b.at("impulse_ratio").get<double>();
            bn.gaussian_seed = b.at("gaussian_seed").get<std::uint64_t>();
            bn.impulse_seed = b.at("impulse_seed").get<std::uint64_t>();
            for (const auto& d : b.at("deadlines"))
                bn.deadlines.push_back({d.at(0).get<std::size_t>(), d.at(1).get<std::size_t>()});
            for (const auto& s : b.at("stripes"))
                bn.stripes.push_back({s.at(0).get<std::size_t>(), s.at(1).get<double>()});
            rec.band_noise.push_back(std::move(bn));
        }
        if (rec.band_noise.size() != rec.bands) throw FormatError("band_noise length differs from bands");
        return rec;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("noise record: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// DenoiseConfig

inline Json to_json(const DenoiseConfig& c) {
    Json j;
    j["rank"] = c.rank;
    j["tau1"] = c.tau1;
    j["tau2"] = c.tau2;
    j["beta"] = c.beta;
    j["lambda"] = c.lambda;
    j["mu0"] = c.mu0;
    j["rho"] = c.rho;
    j["epsilon"] = c.epsilon;
    j["max_iter"] = c.max_iter;
    j["mu_max"] = c.mu_max;
    return j;
}

inline DenoiseConfig denoise_config_from_json(const Json& j) {
    try {
        DenoiseConfig c;
        c.rank = j.at("rank").get<Eigen::Index>();
        c.tau1 = j.at("tau1").get<double>();
        c.tau2 = j.at("tau2").get<double>();
        c.beta = j.at("beta").get<double>();
        c.lambda = j.at("lambda").get<double>();
        c.mu0 = j.at("mu0").get<double>();
        c.rho = j.at("rho").get<double>();
        c.epsilon = j.at("epsilon").get<double>();
        c.max_iter = j.at("max_iter").get<int>();
        c.mu_max = j.at("mu_max").get<double>();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("denoise config: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Diagnostics (one JSON object per line)

inline Json to_json(const IterationDiagnostics& d) {
    Json j;
    j["iter"] = d.iter;
    j["fit_res"] = d.fit_res;
    j["split_res1"] = d.split_res1;
    j["split_res2"] = d.split_res2;
    j["objective"] = d.objective;
    j["mu"] = d.mu;
    j["wall_ms"] = d.wall_ms;
    j["rel_change"] = real_to_json(d.rel_change);
    j["max_imag"] = d.max_imag;
    j["orth_err"] = d.orth_err;
    if (d.descent_checked) {
        j["descent_ok"] = d.descent_ok;
        j["descent_worst"] = d.descent_worst;
    }
    return j;
}

inline void write_diagnostics_jsonl(const std::vector<IterationDiagnostics>& diags, std::ostream& out) {
    for (const auto& d : diags) out << to_json(d).dump() << '\n';
}

// ---------------------------------------------------------------------------
// MetricsReport

inline Json to_json(const MetricsReport& r) {
    Json j;
    j["mpsnr"] = real_to_json(r.mpsnr);
    j["mssim"] = r.mssim;
    j["ergas"] = r.ergas;
    j["msam"] = r.msam;
    j["per_band_psnr"] = Json::array();
    for (double v : r.per_band_psnr) j["per_band_psnr"].push_back(real_to_json(v));
    j["per_band_ssim"] = r.per_band_ssim;
    j["ergas_excluded_bands"] = r.ergas_excluded_bands;
    j["msam_excluded_pixels"] = r.msam_excluded_pixels;
    j["wall_ms"] = r.wall_ms;
    return j;
}

inline MetricsReport metrics_report_from_json(const Json& j) {
    try {
        MetricsReport r;
        r.mpsnr = real_from_json(j.at("mpsnr"));
        r.mssim = real_from_json(j.at("mssim"));
        r.ergas = real_from_json(j.at("ergas"));
        r.msam = real_from_json(j.at("msam"));
        for (const auto& v : j.at("per_band_psnr")) r.per_band_psnr.push_back(real_from_json(v));
        for (const auto& v : j.at("per_band_ssim")) r.per_band_ssim.push_back(real_from_json(v));
        r.ergas_excluded_bands = j.at("ergas_excluded_bands").get<std::size_t>();
        r.msam_excluded_pixels = j.at("msam_excluded_pixels").get<std::size_t>();
        r.wall_ms = j.at("wall_ms").get<double>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("metrics report: ") + e.what());
    }
}

inline constexpr const char* kMetricsCsvHeader = "mpsnr,mssim,ergas,msam,wall_ms";

inline std::string metrics_csv_row(const MetricsReport& r) {
    return format_real(r.mpsnr) + "," + format_real(r.mssim) + "," + format_real(r.ergas) + "," +
           format_real(r.msam) + "," + format_real(r.wall_ms);
}

} // namespace rctv
