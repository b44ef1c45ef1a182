#include <benchmark/benchmark.h>

#include "hmmwave/kernel.hpp"

namespace {

using hmmwave::Kernel;

void BM_KernelConstruct(benchmark::State& state) {
    for (auto _ : state) {
        Kernel k = Kernel::polynomial(9, 9);
        benchmark::DoNotOptimize(k);
    }
}

void BM_KernelEval(benchmark::State& state) {
    Kernel k = Kernel::polynomial(9, 9);
    double x = -1.0;
    for (auto _ : state) {
        x += 1e-4;
        if (x > 1.0) x = -1.0;
        benchmark::DoNotOptimize(k(x));
    }
}

}  // namespace

BENCHMARK(BM_KernelConstruct);
BENCHMARK(BM_KernelEval);
