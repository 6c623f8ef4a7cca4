#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace fer {

/// Size of the worker pool used by data-parallel loops. Defaults to the
/// hardware concurrency; the CLI can cap it via --threads.
unsigned thread_count();
void set_thread_count(unsigned n);

/// Runs body(lo, hi) over a partition of [0, n) into contiguous chunks,
/// one chunk per worker. Each index is owned by exactly one worker, so
/// results are bit-identical for any thread count as long as the body
/// keeps a fixed accumulation order within its chunk.
template <typename Body>
void parallel_for(std::size_t n, const Body& body) {
    if (n == 0) return;
    const std::size_t workers = std::min<std::size_t>(thread_count(), n);
    if (workers <= 1) {
        body(std::size_t{0}, n);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    body(std::size_t{0}, std::min(n, chunk));
    for (auto& t : pool) t.join();
}

}  // namespace fer
