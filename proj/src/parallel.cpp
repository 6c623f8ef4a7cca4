#include "fer/parallel.hpp"

#include <atomic>

namespace fer {

namespace {

std::atomic<unsigned> g_threads{0};

}  // namespace

unsigned thread_count() {
    unsigned n = g_threads.load(std::memory_order_relaxed);
    if (n == 0) {
        n = std::thread::hardware_concurrency();
        if (n == 0) n = 1;
    }
    return n;
}

void set_thread_count(unsigned n) {
    g_threads.store(n == 0 ? 1 : n, std::memory_order_relaxed);
}

}  // namespace fer
