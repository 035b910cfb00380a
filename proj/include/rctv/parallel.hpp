#pragma once

// Thread-count control shared by the CLI and benchmarks. The U solve
// parallelizes over coefficient slices with OpenMP; dense products use
// Eigen's own threading. Both follow set_threads().

#include <cstdlib>
#include <string>
#include <thread>

#include <Eigen/Core>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rctv {

inline constexpr const char* kThreadsEnv = "RCTV_THREADS";

/// RCTV_THREADS when set to a positive integer, otherwise the hardware
/// concurrency.
inline int default_threads() {
    if (const char* env = std::getenv(kThreadsEnv)) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

inline void set_threads(int n) {
    if (n < 1) n = 1;
#ifdef _OPENMP
    omp_set_num_threads(n);
#endif
    Eigen::setNbThreads(n);
}

} // namespace rctv
