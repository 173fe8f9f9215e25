#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace twowell {

/// Worker count: TWOWELL_THREADS caps parallelism, 0 or unset = auto.
inline int worker_count() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("TWOWELL_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap > 0 && static_cast<unsigned>(cap) < hw) return static_cast<int>(cap);
    }
    return static_cast<int>(hw);
}

/// Static block partition of [0, n); each worker owns a contiguous range,
/// so any reduction done per block merges in deterministic index order.
template <typename Fn>
void parallel_for_blocks(std::size_t n, Fn&& body) {
    const int workers = worker_count();
    if (workers <= 1 || n < 2) {
        body(std::size_t{0}, n, 0);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        const std::size_t lo = std::min(n, w * chunk);
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi, w] { body(lo, hi, w); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace twowell
