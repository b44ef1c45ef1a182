#include <benchmark/benchmark.h>

#include <cmath>

#include "hmmwave/coefficient.hpp"
#include "hmmwave/fd_core.hpp"

namespace {

using namespace hmmwave;

WaveStepper make_stepper(int dim, int n, double eps) {
    PeriodicGrid grid;
    grid.dim = dim;
    grid.n = n;
    grid.h = 1.0 / n;
    CoefficientField gen = CoefficientField::periodic1d(1.1, {TrigTerm{1.0, 1, true}}, eps);
    CoefficientField field = dim == 1 ? gen : CoefficientField::diagonal_nd(dim, gen);
    return WaveStepper(grid, {[field](const Point& x) { return field.eval(x); }, true});
}

void leapfrog_steps(benchmark::State& state, int dim, int n) {
    WaveStepper stepper = make_stepper(dim, n, 0.05);
    double dt = 0.4 * cfl_max_dt(stepper.grid(), 2.1);
    auto st = stepper.initial_state(
        [](const Point& x) { return std::sin(2.0 * M_PI * x[0]); }, nullptr, dt);
    for (auto _ : state) {
        stepper.step(st, dt);
        benchmark::DoNotOptimize(st.u_curr.data());
    }
    state.SetItemsProcessed(state.iterations() * stepper.grid().cell_count());
}

void BM_Step1D(benchmark::State& state) {
    leapfrog_steps(state, 1, static_cast<int>(state.range(0)));
}
void BM_Step2D(benchmark::State& state) {
    leapfrog_steps(state, 2, static_cast<int>(state.range(0)));
}
void BM_Step3D(benchmark::State& state) {
    leapfrog_steps(state, 3, static_cast<int>(state.range(0)));
}

}  // namespace

BENCHMARK(BM_Step1D)->Arg(1024)->Arg(8192);
BENCHMARK(BM_Step2D)->Arg(256)->Arg(1024);
BENCHMARK(BM_Step3D)->Arg(64)->Arg(128);
