#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace gibbsgate {

// Worker count: GIBBSGATE_THREADS if set (clamped to [1, 64]), otherwise
// min(hardware_concurrency, 8). Results never depend on this value; it only
// changes wall time.
inline unsigned thread_count() {
    if (const char* env = std::getenv("GIBBSGATE_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0') {
            if (v < 1) v = 1;
            if (v > 64) v = 64;
            return static_cast<unsigned>(v);
        }
    }
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    return std::min(hw, 8u);
}

// Run fn(i) for i in [0, n) across workers. Each worker owns a contiguous
// chunk, so per-index outputs written to distinct slots stay deterministic.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    unsigned workers = thread_count();
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

// True iff pred(i) holds for every i in [0, n). Workers may stop early once
// any worker has seen a failure; the boolean result is order-independent.
inline bool parallel_all(std::size_t n, const std::function<bool(std::size_t)>& pred) {
    unsigned workers = thread_count();
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i)
            if (!pred(i)) return false;
        return true;
    }
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    const std::size_t chunk = (n + workers - 1) / workers;
    std::atomic<bool> ok{true};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &pred, &ok] {
            for (std::size_t i = lo; i < hi && ok.load(std::memory_order_relaxed); ++i)
                if (!pred(i)) { ok.store(false, std::memory_order_relaxed); return; }
        });
    }
    for (auto& t : pool) t.join();
    return ok.load();
}

} // namespace gibbsgate
