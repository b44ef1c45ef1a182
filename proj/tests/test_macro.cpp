#include <cmath>

#include "doctest.h"
#include "hmmwave/macro.hpp"

using namespace hmmwave;

namespace {

PeriodicGrid unit_grid(int dim, int n) {
    PeriodicGrid g;
    g.dim = dim;
    g.n = n;
    g.h = 1.0 / n;
    return g;
}

double mean(const std::vector<double>& u) {
    double s = 0.0;
    for (double v : u) s += v;
    return s / static_cast<double>(u.size());
}

}  // namespace

TEST_CASE("gradient stencil") {
    SUBCASE("exact on linear data away from the wrap") {
        auto grid = unit_grid(2, 16);
        const Point p = {0.7, -1.3, 0};
        std::vector<double> u(grid.cell_count());
        for (int j = 0; j < grid.n; ++j)
            for (int i = 0; i < grid.n; ++i)
                u[grid.index(i, j)] = p[0] * i * grid.h + p[1] * j * grid.h;
        for (int axis = 0; axis < 2; ++axis) {
            Point P = gradient_stencil(u, grid, {7, 8, 0}, axis, +1);
            CHECK(P[0] == doctest::Approx(p[0]).epsilon(1e-12));
            CHECK(P[1] == doctest::Approx(p[1]).epsilon(1e-12));
            Point Pm = gradient_stencil(u, grid, {7, 8, 0}, axis, -1);
            CHECK(Pm[0] == doctest::Approx(p[0]).epsilon(1e-12));
            CHECK(Pm[1] == doctest::Approx(p[1]).epsilon(1e-12));
        }
    }
    SUBCASE("transverse component of x1^2 at a face along axis 2") {
        auto grid = unit_grid(2, 16);
        std::vector<double> u(grid.cell_count());
        for (int j = 0; j < grid.n; ++j)
            for (int i = 0; i < grid.n; ++i) {
                double x1 = i * grid.h;
                u[grid.index(i, j)] = x1 * x1;
            }
        Point P = gradient_stencil(u, grid, {5, 6, 0}, 1, +1);
        // Symmetric average-difference is exact on quadratics.
        CHECK(P[0] == doctest::Approx(2.0 * 5.0 * grid.h).epsilon(1e-12));
        CHECK(P[1] == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("1D reduces to the two-point difference") {
        auto grid = unit_grid(1, 16);
        std::vector<double> u(grid.cell_count());
        for (int i = 0; i < grid.n; ++i) u[i] = std::sin(2.0 * M_PI * i * grid.h);
        Point P = gradient_stencil(u, grid, {4, 0, 0}, 0, +1);
        CHECK(P[0] == doctest::Approx((u[5] - u[4]) / grid.h).epsilon(1e-14));
    }
}

TEST_CASE("constant-coefficient provider degenerates to the direct scheme") {
    Matrix3 abar = Matrix3::diagonal(0.458, 1.1);
    auto grid = unit_grid(2, 16);
    ExactFluxProvider provider(2, abar);
    WaveStepper direct(grid, {[abar](const Point&) { return abar; }, true});

    auto f = [](const Point& x) {
        return std::exp(-((x[0] - 0.5) * (x[0] - 0.5) + (x[1] - 0.5) * (x[1] - 0.5)) / 0.02);
    };
    double dt = 0.4 * cfl_max_dt(grid, 1.1);

    WaveState macro_state = direct.initial_state(f, nullptr, dt);
    WaveState fd_state = direct.initial_state(f, nullptr, dt);

    SUBCASE("single step matches to 1e-14") {
        hmm_step(macro_state, provider, grid, dt);
        direct.step(fd_state, dt);
        double worst = 0.0;
        for (std::size_t i = 0; i < fd_state.u_curr.size(); ++i)
            worst = std::max(worst, std::fabs(macro_state.u_curr[i] - fd_state.u_curr[i]));
        CHECK(worst <= 1e-14);
    }
    SUBCASE("100-step trajectories agree to 1e-12") {
        for (int s = 0; s < 100; ++s) {
            hmm_step(macro_state, provider, grid, dt);
            direct.step(fd_state, dt);
        }
        double worst = 0.0;
        for (std::size_t i = 0; i < fd_state.u_curr.size(); ++i)
            worst = std::max(worst, std::fabs(macro_state.u_curr[i] - fd_state.u_curr[i]));
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("zero initial data stays zero") {
    MacroRunConfig mc;
    mc.dim = 1;
    mc.n = 16;
    mc.coeff_bound = 1.0;
    mc.T = 0.5;
    mc.f = [](const Point&) { return 0.0; };
    ExactFluxProvider provider(1, Matrix3::diagonal(1.0));
    Trajectory traj = run_macro(mc, provider);
    for (double v : traj.final_snapshot().u) CHECK(v == 0.0);
}

TEST_CASE("T = 0 yields a single snapshot of f") {
    MacroRunConfig mc;
    mc.dim = 1;
    mc.n = 16;
    mc.coeff_bound = 1.0;
    mc.T = 0.0;
    mc.f = [](const Point& x) { return x[0]; };
    ExactFluxProvider provider(1, Matrix3::diagonal(1.0));
    Trajectory traj = run_macro(mc, provider);
    CHECK(traj.snapshots.size() == 1);
    CHECK(traj.snapshots[0].time == 0.0);
    CHECK(traj.snapshots[0].u[3] == doctest::Approx(3.0 / 16.0));
}

TEST_CASE("spatial mean is conserved step by step") {
    // x-dependent coefficient: the flux-difference form telescopes anyway.
    auto abar_fn = [](double x) { return std::sqrt(std::pow(1.1 + 0.5 * std::cos(2 * M_PI * x), 2) - 0.25); };
    ExactFluxProvider provider(1, HomogenizedReference::closed_form_1d(abar_fn));
    MacroRunConfig mc;
    mc.dim = 1;
    mc.n = 64;
    mc.coeff_bound = 2.1;
    mc.T = 0.5;
    mc.snapshot_stride = 1;
    mc.f = [](const Point& x) { return std::exp(-(x[0] - 0.5) * (x[0] - 0.5) / 0.01); };
    Trajectory traj = run_macro(mc, provider);
    REQUIRE(traj.snapshots.size() >= 10);
    for (std::size_t s = 1; s < traj.snapshots.size(); ++s) {
        double drift = std::fabs(mean(traj.snapshots[s].u) - mean(traj.snapshots[s - 1].u));
        CHECK(drift <= 1e-10);
    }
}

TEST_CASE("instability guard") {
    MacroRunConfig mc;
    mc.dim = 1;
    mc.n = 64;
    mc.coeff_bound = 1.0;
    mc.cfl = 1.6;  // well above the leapfrog limit
    mc.T = 2.0;
    mc.f = [](const Point& x) { return std::exp(-(x[0] - 0.5) * (x[0] - 0.5) / 0.01); };
    ExactFluxProvider provider(1, Matrix3::diagonal(1.0));
    CHECK_THROWS_AS(run_macro(mc, provider), Error);
}
