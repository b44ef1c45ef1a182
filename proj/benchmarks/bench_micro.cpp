#include <benchmark/benchmark.h>

#include "hmmwave/micro.hpp"

namespace {

using namespace hmmwave;

MicroParams params(double eps, int ratio) {
    MicroParams mp;
    mp.eta = ratio * eps;
    mp.tau = ratio * eps;
    mp.h_per_eps = 64;
    mp.space_kernel = Kernel::polynomial(9, 9);
    mp.time_kernel = Kernel::polynomial(9, 9);
    return mp;
}

// eps-cell path: pure fast scale, linear data.
void BM_MicroSolveCell1D(benchmark::State& state) {
    const double eps = 0.01;
    auto field = CoefficientField::periodic1d(1.1, {TrigTerm{1.0, 1, true}}, eps);
    MicroProblemSpec spec = assemble({0, 0, 0}, {1, 0, 0}, params(eps, 10), field);
    for (auto _ : state) {
        Point f = solve_and_average(spec, field);
        benchmark::DoNotOptimize(f);
    }
}

void BM_MicroSolveCell2D(benchmark::State& state) {
    const double eps = 0.01;
    auto field = CoefficientField::diagonal_nd(
        2, CoefficientField::periodic1d(1.1, {TrigTerm{1.0, 1, true}}, eps));
    MicroProblemSpec spec = assemble({0, 0, 0}, {1, 0, 0}, params(eps, 10), field);
    for (auto _ : state) {
        Point f = solve_and_average(spec, field);
        benchmark::DoNotOptimize(f);
    }
}

// Safety-box path: slow modulation defeats the cell reduction.
void BM_MicroSolveBox1D(benchmark::State& state) {
    const double eps = 0.01;
    auto field = CoefficientField::locally_periodic1d(1.1, TrigTerm{0.5, 1, false},
                                                      TrigTerm{0.5, 1, true}, eps);
    MicroProblemSpec spec = assemble({0.3, 0, 0}, {1, 0, 0}, params(eps, 10), field);
    for (auto _ : state) {
        Point f = solve_and_average(spec, field);
        benchmark::DoNotOptimize(f);
    }
}

}  // namespace

BENCHMARK(BM_MicroSolveCell1D)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MicroSolveCell2D)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MicroSolveBox1D)->Unit(benchmark::kMillisecond);
