#include "hmmwave/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hmmwave {

namespace {

std::atomic<int> g_workers{0};

int resolve_workers() {
    if (const char* env = std::getenv("HMMWAVE_WORKERS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    int n = g_workers.load();
    if (n > 0) return n;
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace

void set_worker_count(int n) { g_workers.store(n); }

int worker_count() { return resolve_workers(); }

void parallel_for_blocks(std::int64_t n, const std::function<void(std::int64_t)>& fn) {
    if (n <= 0) return;
#ifdef _OPENMP
    if (!omp_in_parallel() && n > 1 && resolve_workers() > 1) {
        int threads = resolve_workers();
#pragma omp parallel for schedule(static) num_threads(threads)
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
#endif
    for (std::int64_t i = 0; i < n; ++i) fn(i);
}

}  // namespace hmmwave
