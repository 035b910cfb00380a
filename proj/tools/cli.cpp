#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include <rctv/rctv.hpp>

namespace rctv::cli {

namespace fs = std::filesystem;

namespace {

using clock_type = std::chrono::steady_clock;

double ms_since(clock_type::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

void require_input(const std::string& path, const char* flag) {
    if (path.empty()) throw DomainError(std::string(flag) + " is required");
    if (!fs::is_regular_file(path)) throw DomainError(std::string(flag) + ": no such file: " + path);
}

void require_output(const std::string& path, const char* flag) {
    if (path.empty()) throw DomainError(std::string(flag) + " is required");
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty() && !fs::is_directory(parent)) {
        throw DomainError(std::string(flag) + ": directory does not exist: " + parent.string());
    }
    if (fs::is_directory(path)) throw DomainError(std::string(flag) + ": is a directory: " + path);
}

std::string or_default(const std::string& v, const std::string& fallback) { return v.empty() ? fallback : v; }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot open " + path + " for writing");
    f << text;
    if (!f) throw FormatError("write failed: " + path);
}

Json read_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw FormatError("cannot open " + path);
    try {
        return Json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
}

Json manifest_base(const std::string& command, Json options) {
    Json m;
    m["command"] = command;
    m["version"] = kVersion;
    m["options"] = std::move(options);
    return m;
}

Json range_json(const std::optional<ValueRange>& r) {
    return r ? Json::array({r->lo, r->hi}) : Json();
}

std::optional<ValueRange> range_from(const Json& j) {
    if (j.is_null()) return std::nullopt;
    return ValueRange{j.at(0).get<double>(), j.at(1).get<double>()};
}

template <typename T>
Json opt_json(const std::optional<T>& v) {
    return v ? Json(*v) : Json();
}

template <typename T>
std::optional<T> opt_from(const Json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<T>();
}

// Option (de)serialization for manifests and replay ----------------------

Json to_json(const SimulateOptions& o) {
    return {{"input", o.input},     {"output", o.output},       {"noise_out", o.noise_out},
            {"clean_out", o.clean_out}, {"manifest", o.manifest}, {"case", o.case_id},
            {"profile", o.profile}, {"seed", o.seed},           {"normalize", o.normalize},
            {"stripe_amplitude", o.stripe_amplitude}, {"stripe_clamp", range_json(o.stripe_clamp)}};
}

SimulateOptions simulate_from(const Json& j) {
    SimulateOptions o;
    o.input = j.at("input");
    o.output = j.at("output");
    o.noise_out = j.at("noise_out");
    o.clean_out = j.at("clean_out");
    o.manifest = j.at("manifest");
    o.case_id = j.at("case");
    o.profile = j.at("profile");
    o.seed = j.at("seed");
    o.normalize = j.at("normalize");
    o.stripe_amplitude = j.at("stripe_amplitude");
    o.stripe_clamp = range_from(j.at("stripe_clamp"));
    return o;
}

Json to_json(const DenoiseOptions& o) {
    return {{"input", o.input},       {"output", o.output},     {"diagnostics", o.diagnostics},
            {"manifest", o.manifest}, {"preset", o.preset},     {"tau", o.tau},
            {"rank", o.rank},         {"energy", o.energy},     {"beta", opt_json(o.beta)},
            {"lambda", opt_json(o.lambda)}, {"mu0", o.mu0},     {"rho", o.rho},
            {"eps", o.eps},           {"max_iter", o.max_iter}, {"mu_max", o.mu_max},
            {"check_descent", o.check_descent}, {"threads", o.threads}};
}

DenoiseOptions denoise_from(const Json& j) {
    DenoiseOptions o;
    o.input = j.at("input");
    o.output = j.at("output");
    o.diagnostics = j.at("diagnostics");
    o.manifest = j.at("manifest");
    o.preset = j.at("preset");
    o.tau = j.at("tau");
    o.rank = j.at("rank");
    o.energy = j.at("energy");
    o.beta = opt_from<double>(j.at("beta"));
    o.lambda = opt_from<double>(j.at("lambda"));
    o.mu0 = j.at("mu0");
    o.rho = j.at("rho");
    o.eps = j.at("eps");
    o.max_iter = j.at("max_iter");
    o.mu_max = j.at("mu_max");
    o.check_descent = j.at("check_descent");
    o.threads = j.at("threads");
    return o;
}

Json to_json(const MetricsOptions& o) {
    return {{"reference", o.reference}, {"input", o.input},       {"output", o.output},
            {"csv", o.csv},             {"manifest", o.manifest}, {"ssim_window", o.ssim_window}};
}

MetricsOptions metrics_from(const Json& j) {
    MetricsOptions o;
    o.reference = j.at("reference");
    o.input = j.at("input");
    o.output = j.at("output");
    o.csv = j.at("csv");
    o.manifest = j.at("manifest");
    o.ssim_window = j.at("ssim_window");
    return o;
}

Json to_json(const RankestOptions& o) {
    return {{"input", o.input},   {"output", o.output},
            {"manifest", o.manifest}, {"energy", o.energy},
            {"min_rank", opt_json(o.min_rank)}, {"max_rank", opt_json(o.max_rank)},
            {"normalize", o.normalize}};
}

RankestOptions rankest_from(const Json& j) {
    RankestOptions o;
    o.input = j.at("input");
    o.output = j.at("output");
    o.manifest = j.at("manifest");
    o.energy = j.at("energy");
    o.min_rank = opt_from<long>(j.at("min_rank"));
    o.max_rank = opt_from<long>(j.at("max_rank"));
    o.normalize = j.at("normalize");
    return o;
}

Json to_json(const BenchOptions& o) {
    return {{"output", o.output}, {"manifest", o.manifest}, {"sizes", o.sizes},  {"ranks", o.ranks},
            {"reps", o.reps},     {"max_iter", o.max_iter}, {"tau", o.tau},      {"seed", o.seed},
            {"threads", o.threads}};
}

BenchOptions bench_from(const Json& j) {
    BenchOptions o;
    o.output = j.at("output");
    o.manifest = j.at("manifest");
    o.sizes = j.at("sizes").get<std::vector<std::string>>();
    o.ranks = j.at("ranks").get<std::vector<long>>();
    o.reps = j.at("reps");
    o.max_iter = j.at("max_iter");
    o.tau = j.at("tau");
    o.seed = j.at("seed");
    o.threads = j.at("threads");
    return o;
}

Json to_json(const SynthOptions& o) {
    return {{"output", o.output}, {"manifest", o.manifest}, {"size", o.size}, {"rank", o.rank}, {"seed", o.seed}};
}

SynthOptions synth_from(const Json& j) {
    SynthOptions o;
    o.output = j.at("output");
    o.manifest = j.at("manifest");
    o.size = j.at("size");
    o.rank = j.at("rank");
    o.seed = j.at("seed");
    return o;
}

} // namespace

SizeSpec parse_size(const std::string& s) {
    SizeSpec out;
    char x1 = 0, x2 = 0;
    std::istringstream is(s);
    long m = 0, n = 0, b = 0;
    if (!(is >> m >> x1 >> n >> x2 >> b) || x1 != 'x' || x2 != 'x' || !is.eof() || m < 1 || n < 1 || b < 1) {
        throw DomainError("size \"" + s + "\" is not of the form MxNxB with positive entries");
    }
    out.height = static_cast<std::size_t>(m);
    out.width = static_cast<std::size_t>(n);
    out.bands = static_cast<std::size_t>(b);
    return out;
}

DenoiseConfig make_config(const DenoiseOptions& o) {
    DenoiseConfig c;
    if (o.preset == "gaussian") {
        c = DenoiseConfig::gaussian(o.tau);
    } else if (o.preset == "mixed") {
        c = DenoiseConfig::mixed(o.tau);
    } else {
        throw DomainError("unknown preset \"" + o.preset + "\" (expected gaussian or mixed)");
    }
    if (o.beta) c.beta = *o.beta;
    if (o.lambda) c.lambda = *o.lambda;
    c.mu0 = o.mu0;
    c.rho = o.rho;
    c.epsilon = o.eps;
    c.max_iter = o.max_iter;
    c.mu_max = o.mu_max;
    c.check_descent = o.check_descent;
    if (o.rank != "auto") {
        std::size_t pos = 0;
        long r = 0;
        try {
            r = std::stol(o.rank, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != o.rank.size() || r < 1) throw DomainError("--rank must be a positive integer or \"auto\"");
        c.rank = r;
    }
    return c;
}

// synth ----------------------------------------------------------------------

Json cmd_synth(SynthOptions o, std::ostream& log) {
    const auto t0 = clock_type::now();
    Json manifest = manifest_base("synth", to_json(o));
    require_output(o.output, "--output");
    o.manifest = or_default(o.manifest, o.output + ".manifest.json");
    require_output(o.manifest, "--manifest");
    const SizeSpec sz = parse_size(o.size);
    if (o.rank < 1 || static_cast<std::size_t>(o.rank) > sz.bands) {
        throw DomainError("--rank must lie in [1, B]");
    }
    SyntheticSpec spec;
    spec.height = sz.height;
    spec.width = sz.width;
    spec.bands = sz.bands;
    spec.rank = static_cast<std::size_t>(o.rank);
    spec.seed = o.seed;
    const HsiCube cube = make_low_rank_cube(spec);
    log << "synth: " << o.size << " rank " << o.rank << "\n";
    write_cube(cube, o.output);
    manifest["inputs"] = Json::array();
    manifest["outputs"] = Json::array({o.output, o.manifest});
    manifest["seed"] = o.seed;
    manifest["wall_ms"] = {{"total", ms_since(t0)}};
    write_text(o.manifest, manifest.dump(2) + "\n");
    return manifest;
}

// simulate -------------------------------------------------------------------

Json cmd_simulate(SimulateOptions o, std::ostream& log) {
    const auto t0 = clock_type::now();
    Json manifest = manifest_base("simulate", to_json(o));
    require_input(o.input, "--input");
    require_output(o.output, "--output");
    o.noise_out = or_default(o.noise_out, o.output + ".noise.json");
    o.manifest = or_default(o.manifest, o.output + ".manifest.json");
    require_output(o.noise_out, "--noise-out");
    require_output(o.manifest, "--manifest");
    if (!o.clean_out.empty()) require_output(o.clean_out, "--clean-out");
    if (!is_case_id(o.case_id)) throw DomainError("--case must be one of a-f");
    const DatasetProfile profile = parse_profile(o.profile);
    if (!(o.stripe_amplitude >= 0.0)) throw DomainError("--stripe-amplitude must be non-negative");
    if (o.stripe_clamp && !(o.stripe_clamp->lo <= o.stripe_clamp->hi)) {
        throw DomainError("--stripe-clamp needs lo <= hi");
    }

    HsiCube clean = read_cube(o.input);
    const double read_ms = ms_since(t0);
    if (o.normalize) clean = normalize_bands(clean).first;

    const auto t1 = clock_type::now();
    auto [noisy, rec] = apply_case(clean, o.case_id, profile, o.seed, {o.stripe_amplitude, o.stripe_clamp});
    const double noise_ms = ms_since(t1);
    if (rec.windows_rescaled) {
        log << "simulate: band windows rescaled from the " << o.profile << " reference to " << clean.bands()
            << " bands\n";
    }

    write_cube(noisy, o.output);
    write_text(o.noise_out, rctv::to_json(rec).dump(2) + "\n");
    Json outputs = Json::array({o.output, o.noise_out});
    if (!o.clean_out.empty()) {
        write_cube(clean, o.clean_out);
        outputs.push_back(o.clean_out);
    }
    outputs.push_back(o.manifest);

    manifest["inputs"] = Json::array({o.input});
    manifest["outputs"] = outputs;
    manifest["seed"] = o.seed;
    manifest["result"] = {{"windows_rescaled", rec.windows_rescaled},
                          {"structures_clamped", rec.structures_clamped}};
    manifest["wall_ms"] = {{"read", read_ms}, {"noise", noise_ms}, {"total", ms_since(t0)}};
    write_text(o.manifest, manifest.dump(2) + "\n");
    return manifest;
}

// denoise --------------------------------------------------------------------

Json cmd_denoise(DenoiseOptions o, std::ostream& log) {
    const auto t0 = clock_type::now();
    Json manifest = manifest_base("denoise", to_json(o));
    require_input(o.input, "--input");
    require_output(o.output, "--output");
    o.diagnostics = or_default(o.diagnostics, o.output + ".diag.jsonl");
    o.manifest = or_default(o.manifest, o.output + ".manifest.json");
    require_output(o.diagnostics, "--diagnostics");
    require_output(o.manifest, "--manifest");
    if (o.threads < 0) throw DomainError("--threads must be non-negative");
    DenoiseConfig cfg = make_config(o);
    {
        DenoiseConfig probe = cfg;
        if (probe.rank == 0) probe.rank = 1;
        probe.validate();
    }
    if (!(o.energy > 0.0 && o.energy <= 1.0)) throw DomainError("--energy must lie in (0, 1]");

    const HsiCube raw = read_cube(o.input);
    const double read_ms = ms_since(t0);
    auto [y, norm] = normalize_bands(raw);
    if (norm.constant_count() > 0) log << "denoise: " << norm.constant_count() << " constant band(s) flagged\n";

    Json rank_info;
    if (cfg.rank == 0) {
        const auto est = estimate_rank_detailed(y.casorati(), o.energy);
        cfg.rank = est.rank;
        log << "denoise: rank auto -> " << est.rank << " (energy " << est.captured << ", unclamped "
            << est.unclamped << ")\n";
        rank_info = {{"mode", "auto"}, {"rank", est.rank}, {"unclamped", est.unclamped},
                     {"captured", est.captured}, {"energy_fraction", o.energy}};
    } else {
        rank_info = {{"mode", "fixed"}, {"rank", cfg.rank}};
    }
    if (static_cast<std::size_t>(cfg.rank) > raw.bands()) {
        throw DomainError("--rank " + std::to_string(cfg.rank) + " exceeds the band count " +
                          std::to_string(raw.bands()));
    }
    if (raw.height() < 2 || raw.width() < 2) throw DomainError("denoise needs planes of at least 2x2 pixels");

    const int threads = o.threads > 0 ? o.threads : default_threads();
    set_threads(threads);

    const auto t1 = clock_type::now();
    SolveResult res = solve(y, cfg);
    const double solve_ms = ms_since(t1);
    const HsiCube restored = denormalize_bands(res.restored, norm);
    log << "denoise: " << res.diagnostics.size() << " iteration(s), "
        << (res.converged ? "converged" : "not converged") << "\n";

    write_cube(restored, o.output);
    std::ostringstream diag;
    write_diagnostics_jsonl(res.diagnostics, diag);
    write_text(o.diagnostics, diag.str());

    manifest["inputs"] = Json::array({o.input});
    manifest["outputs"] = Json::array({o.output, o.diagnostics, o.manifest});
    manifest["config"] = rctv::to_json(cfg);
    manifest["rank"] = rank_info;
    manifest["threads"] = threads;
    manifest["result"] = {{"iterations", res.diagnostics.size()}, {"converged", res.converged},
                          {"constant_bands", norm.constant_count()}};
    manifest["wall_ms"] = {{"read", read_ms}, {"solve", solve_ms}, {"total", ms_since(t0)}};
    write_text(o.manifest, manifest.dump(2) + "\n");
    return manifest;
}

// metrics --------------------------------------------------------------------

Json cmd_metrics(MetricsOptions o, std::ostream& log) {
    const auto t0 = clock_type::now();
    Json manifest = manifest_base("metrics", to_json(o));
    require_input(o.reference, "--reference");
    require_input(o.input, "--input");
    require_output(o.output, "--output");
    o.manifest = or_default(o.manifest, o.output + ".manifest.json");
    require_output(o.manifest, "--manifest");
    if (!o.csv.empty()) require_output(o.csv, "--csv");
    if (o.ssim_window < 1) throw DomainError("--ssim-window must be positive");

    const HsiCube ref = read_cube(o.reference);
    const HsiCube test = read_cube(o.input);
    SsimOptions ssim;
    ssim.window = o.ssim_window;
    const MetricsReport rep = evaluate(ref, test, ssim);
    log << "metrics: mpsnr " << format_real(rep.mpsnr) << " mssim " << format_real(rep.mssim) << " ergas "
        << format_real(rep.ergas) << " msam " << format_real(rep.msam) << "\n";

    write_text(o.output, rctv::to_json(rep).dump(2) + "\n");
    Json outputs = Json::array({o.output});
    if (!o.csv.empty()) {
        write_text(o.csv, std::string(kMetricsCsvHeader) + "\n" + metrics_csv_row(rep) + "\n");
        outputs.push_back(o.csv);
    }
    outputs.push_back(o.manifest);
    manifest["inputs"] = Json::array({o.reference, o.input});
    manifest["outputs"] = outputs;
    manifest["result"] = {{"mpsnr", real_to_json(rep.mpsnr)}, {"mssim", rep.mssim}, {"ergas", rep.ergas},
                          {"msam", rep.msam}};
    manifest["wall_ms"] = {{"metrics", rep.wall_ms}, {"total", ms_since(t0)}};
    write_text(o.manifest, manifest.dump(2) + "\n");
    return manifest;
}

// rankest --------------------------------------------------------------------

Json cmd_rankest(RankestOptions o, std::ostream& log) {
    const auto t0 = clock_type::now();
    Json manifest = manifest_base("rankest", to_json(o));
    require_input(o.input, "--input");
    require_output(o.output, "--output");
    o.manifest = or_default(o.manifest, o.output + ".manifest.json");
    require_output(o.manifest, "--manifest");
    if (!(o.energy > 0.0 && o.energy <= 1.0)) throw DomainError("--energy must lie in (0, 1]");

    HsiCube cube = read_cube(o.input);
    if (o.normalize) cube = normalize_bands(cube).first;
    const auto bands = static_cast<Eigen::Index>(cube.bands());
    RankBounds bounds = default_rank_bounds(bands);
    if (o.min_rank) bounds.lo = *o.min_rank;
    if (o.max_rank) bounds.hi = *o.max_rank;
    if (bounds.lo < 1 || bounds.lo > bounds.hi || bounds.hi > bands) {
        throw DomainError("rank bounds [" + std::to_string(bounds.lo) + ", " + std::to_string(bounds.hi) +
                          "] invalid for " + std::to_string(bands) + " bands");
    }
    const RankEstimate est = estimate_rank_detailed(cube.casorati(), o.energy, bounds);
    log << "rankest: R = " << est.rank << "\n";

    const Json result = {{"rank", est.rank},         {"unclamped", est.unclamped}, {"captured", est.captured},
                         {"energy_fraction", o.energy}, {"bounds", {bounds.lo, bounds.hi}}};
    write_text(o.output, result.dump(2) + "\n");
    manifest["inputs"] = Json::array({o.input});
    manifest["outputs"] = Json::array({o.output, o.manifest});
    manifest["result"] = result;
    manifest["wall_ms"] = {{"total", ms_since(t0)}};
    write_text(o.manifest, manifest.dump(2) + "\n");
    return manifest;
}

// bench ----------------------------------------------------------------------

Json cmd_bench(BenchOptions o, std::ostream& log) {
    const auto t0 = clock_type::now();
    Json manifest = manifest_base("bench", to_json(o));
    require_output(o.output, "--output");
    o.manifest = or_default(o.manifest, o.output + ".manifest.json");
    require_output(o.manifest, "--manifest");
    if (o.reps < 1) throw DomainError("--reps must be positive");
    if (o.max_iter < 1) throw DomainError("--max-iter must be positive");
    if (o.threads < 1) throw DomainError("--threads must be positive");
    if (!(o.tau >= 0.0)) throw DomainError("--tau must be non-negative");
    if (o.sizes.empty() || o.ranks.empty()) throw DomainError("--sizes and --ranks must be non-empty");
    std::vector<SizeSpec> sizes;
    for (const auto& s : o.sizes) {
        sizes.push_back(parse_size(s));
        if (sizes.back().height < 2 || sizes.back().width < 2) throw DomainError("bench planes must be at least 2x2");
        for (long r : o.ranks) {
            if (r < 1 || static_cast<std::size_t>(r) > sizes.back().bands) {
                throw DomainError("rank " + std::to_string(r) + " invalid for size " + s);
            }
        }
    }
    set_threads(o.threads);

    std::ostringstream csv;
    csv << "M,N,B,R,rep,wall_ms\n";
    for (const auto& sz : sizes) {
        SyntheticSpec spec;
        spec.height = sz.height;
        spec.width = sz.width;
        spec.bands = sz.bands;
        spec.rank = std::min<std::size_t>(4, sz.bands);
        spec.seed = o.seed;
        const HsiCube clean = make_low_rank_cube(spec);
        Rng rng(derive_seed(o.seed, 0xbe7c));
        const HsiCube noisy = add_gaussian(clean, {0.05, 0.05}, rng).first;
        for (long r : o.ranks) {
            DenoiseConfig cfg = DenoiseConfig::mixed(o.tau, r);
            cfg.max_iter = o.max_iter;
            cfg.stop_on_convergence = false;
            for (int rep = 0; rep < o.reps; ++rep) {
                const auto t1 = clock_type::now();
                const SolveResult res = solve(noisy, cfg);
                const double ms = ms_since(t1);
                csv << sz.height << ',' << sz.width << ',' << sz.bands << ',' << r << ',' << rep << ','
                    << format_real(ms) << '\n';
                log << "bench: " << sz.height << 'x' << sz.width << 'x' << sz.bands << " R=" << r << " rep " << rep
                    << ": " << ms << " ms (" << res.diagnostics.size() << " it)\n";
            }
        }
    }

    write_text(o.output, csv.str());
    manifest["inputs"] = Json::array();
    manifest["outputs"] = Json::array({o.output, o.manifest});
    manifest["seed"] = o.seed;
    manifest["threads"] = o.threads;
    manifest["wall_ms"] = {{"total", ms_since(t0)}};
    write_text(o.manifest, manifest.dump(2) + "\n");
    return manifest;
}

// replay ---------------------------------------------------------------------

Json cmd_replay(const std::string& manifest_path, const std::string& output, std::ostream& log) {
    const Json m = read_json(manifest_path);
    const Json* opts = nullptr;
    std::string command;
    try {
        command = m.at("command").get<std::string>();
        opts = &m.at("options");
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(manifest_path + ": " + e.what());
    }
    const bool redirect = !output.empty();
    auto moved = [&](std::string& path, const char* suffix) {
        if (redirect && !path.empty()) path = output + suffix;
    };
    try {
        if (command == "synth") {
            auto o = synth_from(*opts);
            if (redirect) {
                o.output = output;
                o.manifest.clear();
            }
            return cmd_synth(o, log);
        }
        if (command == "simulate") {
            auto o = simulate_from(*opts);
            if (redirect) {
                o.output = output;
                o.noise_out.clear();
                o.manifest.clear();
                moved(o.clean_out, ".clean.hsic");
            }
            return cmd_simulate(o, log);
        }
        if (command == "denoise") {
            auto o = denoise_from(*opts);
            if (redirect) {
                o.output = output;
                o.diagnostics.clear();
                o.manifest.clear();
            }
            return cmd_denoise(o, log);
        }
        if (command == "metrics") {
            auto o = metrics_from(*opts);
            if (redirect) {
                o.output = output;
                o.manifest.clear();
                moved(o.csv, ".csv");
            }
            return cmd_metrics(o, log);
        }
        if (command == "rankest") {
            auto o = rankest_from(*opts);
            if (redirect) {
                o.output = output;
                o.manifest.clear();
            }
            return cmd_rankest(o, log);
        }
        if (command == "bench") {
            auto o = bench_from(*opts);
            if (redirect) {
                o.output = output;
                o.manifest.clear();
            }
            return cmd_bench(o, log);
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(manifest_path + ": " + e.what());
    }
    throw FormatError(manifest_path + ": unknown command \"" + command + "\"");
}

// argument parsing -----------------------------------------------------------

namespace {

std::optional<ValueRange> parse_range(const std::string& s) {
    if (s.empty()) return std::nullopt;
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw DomainError("range \"" + s + "\" must be LO,HI");
    try {
        std::size_t p1 = 0, p2 = 0;
        const std::string a = s.substr(0, comma), b = s.substr(comma + 1);
        ValueRange r{std::stod(a, &p1), std::stod(b, &p2)};
        if (p1 != a.size() || p2 != b.size()) throw std::invalid_argument(s);
        return r;
    } catch (const std::logic_error&) {
        throw DomainError("range \"" + s + "\" must be LO,HI");
    }
}

const char* kMetricsFooter =
    "The CSV report has one header line and one row with columns "
    "mpsnr,mssim,ergas,msam,wall_ms. Infinite PSNR is written as inf.";

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Subspace total-variation restoration of hyperspectral cubes under mixed noise"};
    app.name("rctv");
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    SynthOptions syn;
    auto* y = app.add_subcommand("synth", "Write a seeded, exactly low-rank, spatially smooth test cube");
    y->add_option("--output", syn.output, ".hsic cube")->required();
    y->add_option("--manifest", syn.manifest, "run manifest (default <output>.manifest.json)");
    y->add_option("--size", syn.size, "MxNxB");
    y->add_option("--rank", syn.rank, "exact rank");
    y->add_option("--seed", syn.seed, "seed");

    SimulateOptions sim;
    std::string sim_clamp;
    auto* s = app.add_subcommand("simulate", "Add one of the benchmark noise cases a-f to a cube");
    s->add_option("--input", sim.input, "clean .hsic cube")->required();
    s->add_option("--output", sim.output, "noisy .hsic cube")->required();
    s->add_option("--noise-out", sim.noise_out, "noise record JSON (default <output>.noise.json)");
    s->add_option("--clean-out", sim.clean_out, "also write the normalized clean cube here");
    s->add_option("--manifest", sim.manifest, "run manifest (default <output>.manifest.json)");
    s->add_option("--case", sim.case_id, "noise case")->check(CLI::IsMember({"a", "b", "c", "d", "e", "f"}))->required();
    s->add_option("--profile", sim.profile, "band-window profile")->check(CLI::IsMember({"msi31", "hsi160"}));
    s->add_option("--seed", sim.seed, "master seed");
    s->add_flag("!--no-normalize", sim.normalize, "skip band-wise min-max rescaling of the input");
    s->add_option("--stripe-amplitude", sim.stripe_amplitude, "stripe offsets are uniform in [-A, A]")
        ->check(CLI::NonNegativeNumber);
    s->add_option("--stripe-clamp", sim_clamp, "clamp striped columns into LO,HI");

    DenoiseOptions den;
    double den_beta = 0.0, den_lambda = 0.0;
    auto* d = app.add_subcommand("denoise", "Restore a cube with the ADMM solver");
    d->add_option("--input", den.input, "noisy .hsic cube")->required();
    d->add_option("--output", den.output, "restored .hsic cube")->required();
    d->add_option("--diagnostics", den.diagnostics, "per-iteration JSONL (default <output>.diag.jsonl)");
    d->add_option("--manifest", den.manifest, "run manifest (default <output>.manifest.json)");
    d->add_option("--preset", den.preset, "gaussian: beta=1, lambda=100; mixed: beta=50, lambda=1")
        ->check(CLI::IsMember({"gaussian", "mixed"}));
    d->add_option("--tau", den.tau, "TV weight for both directions")->check(CLI::NonNegativeNumber);
    d->add_option("--rank", den.rank, "subspace dimension R, or auto");
    d->add_option("--energy", den.energy, "energy fraction for --rank auto");
    auto* ob = d->add_option("--beta", den_beta, "override the preset Gaussian weight")->check(CLI::NonNegativeNumber);
    auto* ol = d->add_option("--lambda", den_lambda, "override the preset sparse weight")->check(CLI::NonNegativeNumber);
    d->add_option("--mu0", den.mu0, "initial penalty");
    d->add_option("--rho", den.rho, "penalty growth factor");
    d->add_option("--eps", den.eps, "residual tolerance");
    d->add_option("--max-iter", den.max_iter, "iteration cap");
    d->add_option("--mu-max", den.mu_max, "penalty cap");
    d->add_flag("--check-descent", den.check_descent, "record augmented Lagrangian decrease per block");
    d->add_option("--threads", den.threads, "worker threads (default RCTV_THREADS or all cores)");

    MetricsOptions met;
    auto* m = app.add_subcommand("metrics", "Compare a cube against a reference");
    m->add_option("--reference", met.reference, "reference .hsic cube")->required();
    m->add_option("--input", met.input, "cube under test")->required();
    m->add_option("--output", met.output, "JSON report")->required();
    m->add_option("--csv", met.csv, "one-row CSV report");
    m->add_option("--manifest", met.manifest, "run manifest (default <output>.manifest.json)");
    m->add_option("--ssim-window", met.ssim_window, "SSIM window size");
    m->footer(kMetricsFooter);

    RankestOptions rk;
    long rk_min = 0, rk_max = 0;
    auto* r = app.add_subcommand("rankest", "Estimate the subspace dimension from singular-value energy");
    r->add_option("--input", rk.input, ".hsic cube")->required();
    r->add_option("--output", rk.output, "JSON result")->required();
    r->add_option("--manifest", rk.manifest, "run manifest (default <output>.manifest.json)");
    r->add_option("--energy", rk.energy, "energy fraction to capture");
    auto* omin = r->add_option("--min-rank", rk_min, "lower clamp (default min(2, B))");
    auto* omax = r->add_option("--max-rank", rk_max, "upper clamp (default ceil(0.15 B))");
    r->add_flag("!--no-normalize", rk.normalize, "skip band-wise min-max rescaling");

    BenchOptions bn;
    auto* b = app.add_subcommand("bench", "Time the solver on synthetic cubes");
    b->add_option("--output", bn.output, "CSV with columns M,N,B,R,rep,wall_ms")->required();
    b->add_option("--manifest", bn.manifest, "run manifest (default <output>.manifest.json)");
    b->add_option("--sizes", bn.sizes, "cube sizes MxNxB")->delimiter(',');
    b->add_option("--ranks", bn.ranks, "ranks R")->delimiter(',');
    b->add_option("--reps", bn.reps, "repetitions per (size, rank)");
    b->add_option("--max-iter", bn.max_iter, "fixed iteration count");
    b->add_option("--tau", bn.tau, "TV weight");
    b->add_option("--seed", bn.seed, "synthetic cube seed");
    b->add_option("--threads", bn.threads, "worker threads");

    std::string replay_manifest, replay_output;
    auto* p = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    p->add_option("--manifest", replay_manifest, "manifest written by an earlier run")->required();
    p->add_option("--output", replay_output, "write to this output instead of the recorded one");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        Json manifest;
        if (*y) {
            manifest = cmd_synth(syn, err);
        } else if (*s) {
            sim.stripe_clamp = parse_range(sim_clamp);
            manifest = cmd_simulate(sim, err);
        } else if (*d) {
            if (ob->count()) den.beta = den_beta;
            if (ol->count()) den.lambda = den_lambda;
            manifest = cmd_denoise(den, err);
        } else if (*m) {
            manifest = cmd_metrics(met, err);
        } else if (*r) {
            if (omin->count()) rk.min_rank = rk_min;
            if (omax->count()) rk.max_rank = rk_max;
            manifest = cmd_rankest(rk, err);
        } else if (*b) {
            manifest = cmd_bench(bn, err);
        } else if (*p) {
            manifest = cmd_replay(replay_manifest, replay_output, err);
        }
        if (manifest.contains("result")) out << manifest["result"].dump() << "\n";
        return 0;
    } catch (const std::exception& e) {
        err << "rctv: error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace rctv::cli
