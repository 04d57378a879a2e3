#pragma once

// Deterministic parallel loop: each index writes only its own slot, so the
// result is independent of the thread count and schedule.

#include <cstdlib>
#include <thread>
#include <vector>

namespace lorlab {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("LORLAB_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

template <typename F>
void parallel_for(long begin, long end, int threads, F&& fn) {
    const int nt = std::min<long>(resolve_threads(threads), std::max<long>(1, end - begin));
    if (nt <= 1) {
        for (long i = begin; i < end; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    const long chunk = (end - begin + nt - 1) / nt;
    for (int t = 0; t < nt; ++t) {
        const long lo = begin + t * chunk;
        const long hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (long i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace lorlab
