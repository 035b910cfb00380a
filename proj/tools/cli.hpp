#pragma once

// Command implementations behind the `rctv` executable. Each command
// validates its options and inputs, computes everything in memory, and only
// then writes its outputs plus one JSON run manifest.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <rctv/serialize.hpp>

namespace rctv::cli {

struct SimulateOptions {
    std::string input;
    std::string output;
    std::string noise_out;     ///< default: <output>.noise.json
    std::string clean_out;     ///< optional normalized clean cube
    std::string manifest;      ///< default: <output>.manifest.json
    std::string case_id = "a";
    std::string profile = "msi31";
    std::uint64_t seed = 0;
    bool normalize = true;
    double stripe_amplitude = 0.25;
    std::optional<ValueRange> stripe_clamp;
};

struct DenoiseOptions {
    std::string input;
    std::string output;
    std::string diagnostics; ///< default: <output>.diag.jsonl
    std::string manifest;
    std::string preset = "mixed";
    double tau = 0.01;
    std::string rank = "auto";
    double energy = 0.995;
    std::optional<double> beta, lambda;
    double mu0 = 1e-3;
    double rho = 1.25;
    double eps = 1e-6;
    int max_iter = 50;
    double mu_max = 1e6;
    bool check_descent = false;
    int threads = 0; ///< 0: RCTV_THREADS or hardware concurrency
};

struct MetricsOptions {
    std::string reference;
    std::string input;
    std::string output; ///< JSON report
    std::string csv;    ///< optional one-row CSV
    std::string manifest;
    int ssim_window = 11;
};

struct RankestOptions {
    std::string input;
    std::string output; ///< JSON result
    std::string manifest;
    double energy = 0.995;
    std::optional<long> min_rank, max_rank;
    bool normalize = true;
};

struct BenchOptions {
    std::string output; ///< CSV
    std::string manifest;
    std::vector<std::string> sizes{"64x64x16"};
    std::vector<long> ranks{2, 4, 8};
    int reps = 1;
    int max_iter = 20;
    double tau = 0.01;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct SynthOptions {
    std::string output;
    std::string manifest;
    std::string size = "32x32x31";
    long rank = 3;
    std::uint64_t seed = 1;
};

struct SizeSpec {
    std::size_t height = 0, width = 0, bands = 0;
};

/// Parses "MxNxB".
SizeSpec parse_size(const std::string& s);

/// Resolves a denoise configuration; rank stays 0 when options.rank is "auto".
DenoiseConfig make_config(const DenoiseOptions& o);

Json cmd_synth(SynthOptions o, std::ostream& log);
Json cmd_simulate(SimulateOptions o, std::ostream& log);
Json cmd_denoise(DenoiseOptions o, std::ostream& log);
Json cmd_metrics(MetricsOptions o, std::ostream& log);
Json cmd_rankest(RankestOptions o, std::ostream& log);
Json cmd_bench(BenchOptions o, std::ostream& log);

/// Re-runs the command recorded in a manifest. When output is non-empty it
/// replaces the recorded output and every derived path follows it.
Json cmd_replay(const std::string& manifest_path, const std::string& output, std::ostream& log);

/// Full command-line entry point; returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace rctv::cli
