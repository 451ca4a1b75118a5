#pragma once

#include <algorithm>
#include <complex>
#include <cstdlib>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace czlab {

/// Worker count: CZLAB_THREADS caps parallelism, default = hardware.
inline unsigned threadCount() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("CZLAB_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1 && static_cast<unsigned>(v) < hw) return static_cast<unsigned>(v);
    }
    return hw;
}

/// Chunked parallel loop over [0, n). body(i) must be pure w.r.t. shared
/// state; reductions belong in the caller via per-chunk buffers.
inline void parallelFor(std::int64_t n, const std::function<void(std::int64_t)>& body) {
    unsigned workers = threadCount();
    if (workers <= 1 || n < 1024) {
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::int64_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        std::int64_t lo = w * chunk;
        std::int64_t hi = std::min<std::int64_t>(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::int64_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

/// Parallel sum of body(i) over [0, n) with per-chunk accumulators.
inline std::complex<double> parallelSum(
    std::int64_t n, const std::function<std::complex<double>(std::int64_t)>& body) {
    unsigned workers = threadCount();
    if (workers <= 1 || n < 256) {
        std::complex<double> s(0);
        for (std::int64_t i = 0; i < n; ++i) s += body(i);
        return s;
    }
    std::vector<std::complex<double>> partial(workers, std::complex<double>(0));
    std::vector<std::thread> pool;
    std::int64_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        std::int64_t lo = w * chunk;
        std::int64_t hi = std::min<std::int64_t>(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, w, &body, &partial] {
            std::complex<double> s(0);
            for (std::int64_t i = lo; i < hi; ++i) s += body(i);
            partial[w] = s;
        });
    }
    for (auto& t : pool) t.join();
    std::complex<double> s(0);
    for (auto v : partial) s += v;
    return s;
}

} // namespace czlab
