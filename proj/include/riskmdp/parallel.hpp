// Copyright (c) 2026 the riskmdp authors
// SPDX-License-Identifier: MIT
//
// Minimal deterministic parallel sweep.  Bellman sweeps are embarrassingly
// parallel: the value layer is read-only, each index writes its own slot,
// and no cross-index ordering is required, so results are bit-identical for
// any worker count.

#ifndef RISKMDP_PARALLEL_HPP
#define RISKMDP_PARALLEL_HPP

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace riskmdp {

/// Requested worker cap; 0 means "unset" (fall back to the RISKMDP_THREADS
/// environment variable, then to the hardware concurrency).
inline int& max_threads_setting() {
    static int setting = 0;
    return setting;
}

inline void set_max_threads(int n) { max_threads_setting() = n > 0 ? n : 0; }

inline int resolve_threads() {
    if (max_threads_setting() > 0) return max_threads_setting();
    if (const char* env = std::getenv("RISKMDP_THREADS")) {
        char* end = nullptr;
        const long parsed = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && parsed > 0 && parsed < 4096)
            return static_cast<int>(parsed);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

/// Runs f(i) for i in [0, n).  Work is split into contiguous blocks, one per
/// worker, so any exception surfaces from a deterministic block (the lowest
/// worker index that threw).
template <typename F>
void parallel_for(std::size_t n, F&& f) {
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(resolve_threads()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(n, lo + chunk);
            try {
                for (std::size_t i = lo; i < hi; ++i) f(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace riskmdp

#endif // RISKMDP_PARALLEL_HPP
