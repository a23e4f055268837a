#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace bnlab {

// Global worker cap, set once by the CLI (--workers); 0 = hardware default.
int worker_count();
void set_worker_count(int n);

// Runs body(i) for i in [0, n).  Work is dealt in fixed chunks so that any
// per-chunk outputs land in caller-owned slots; reductions done by the caller
// in index order stay bit-identical regardless of thread count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    int workers = worker_count();
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    std::size_t per = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        std::size_t lo = static_cast<std::size_t>(w) * per;
        std::size_t hi = std::min(n, lo + per);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace bnlab
