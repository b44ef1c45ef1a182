#include <cmath>

#include "doctest.h"
#include "hmmwave/reference.hpp"

using namespace hmmwave;

namespace {

CoefficientField example1_field(double eps) {
    return CoefficientField::periodic1d(1.1, {TrigTerm{1.0, 1, true}}, eps);
}

ScalarField gaussian() {
    return [](const Point& x) { return std::exp(-(x[0] - 0.5) * (x[0] - 0.5) / 0.01); };
}

// Measures the temporal frequency of a single spatial mode via the first zero
// crossing of its projection coefficient.
double measure_frequency(const Trajectory& traj, int mode) {
    const int n = traj.grid.n;
    auto project = [&](const std::vector<double>& u) {
        double c = 0.0;
        for (int i = 0; i < n; ++i)
            c += u[i] * std::sin(2.0 * M_PI * mode * i * traj.grid.h);
        return 2.0 * c / n;
    };
    double prev = project(traj.snapshots[0].u);
    for (std::size_t s = 1; s < traj.snapshots.size(); ++s) {
        double cur = project(traj.snapshots[s].u);
        if ((prev > 0.0) != (cur > 0.0)) {
            double t0 = traj.snapshots[s - 1].time;
            double t1 = traj.snapshots[s].time;
            double tz = t0 + (t1 - t0) * prev / (prev - cur);
            return 0.5 * M_PI / tz;  // cos(w t) first crosses zero at w t = pi/2
        }
        prev = cur;
    }
    throw Error("no zero crossing found");
}

}  // namespace

TEST_CASE("dns validates the resolution requirement") {
    auto field = example1_field(0.05);
    CHECK_THROWS_AS(run_dns(field, gaussian(), nullptr, 128, 0.1), Error);  // h = eps/6.4
    CHECK_NOTHROW(run_dns(field, gaussian(), nullptr, 640, 0.05));
}

TEST_CASE("dns on a constant medium follows d'Alembert") {
    auto field = CoefficientField::periodic1d(1.0, {}, 0.05);
    const int n = 640;
    Trajectory traj = run_dns(field, [](const Point& x) { return std::sin(2.0 * M_PI * x[0]); },
                              nullptr, n, 0.25);
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
        double exact = std::sin(2.0 * M_PI * i / static_cast<double>(n)) *
                       std::cos(2.0 * M_PI * 0.25);
        err = std::max(err, std::fabs(traj.final_snapshot().u[i] - exact));
    }
    CHECK(err < 2e-4);
}

TEST_CASE("dns shows the split pulse with micro oscillations") {
    const double eps = 0.05;
    auto field = example1_field(eps);
    const int n = 1280;
    const double T = 0.5;
    Trajectory traj = run_dns(field, gaussian(), nullptr, n, T);
    const auto& u = traj.final_snapshot().u;

    const double c = std::sqrt(0.458257569495584);
    auto value_near = [&](double x) {
        int i = static_cast<int>(std::llround(x * n)) % n;
        double m = 0.0;
        for (int d = -16; d <= 16; ++d) m = std::max(m, u[(i + d + n) % n]);
        return m;
    };
    // Two half-amplitude pulses at 0.5 +- cT, up to O(eps) oscillations.
    CHECK(value_near(0.5 + c * T) > 0.38);
    CHECK(value_near(0.5 - c * T) > 0.38);
    double global = 0.0;
    for (double v : u) global = std::max(global, v);
    CHECK(global < 0.68);
    CHECK(value_near(0.5) < 0.25);  // the center has emptied out
}

TEST_CASE("homogenized pulse speed matches sqrt(Abar)") {
    auto ref = example1_field(0.01).homogenized();
    const int n = 400;
    Trajectory traj = run_homogenized(ref, 1, gaussian(), nullptr, n, 1.0);
    const auto& u = traj.final_snapshot().u;
    const double c = std::sqrt(0.458257569495584);  // 0.6770
    double exp_left = 0.5 - c, exp_right = 0.5 + c;  // mod 1: 0.823 and 0.177
    exp_left += 1.0;
    auto peak_near = [&](double x) {
        int i0 = static_cast<int>(std::llround(x * n));
        double best = -1.0;
        int arg = 0;
        for (int d = -12; d <= 12; ++d) {
            int i = (i0 + d + n) % n;
            if (u[i] > best) {
                best = u[i];
                arg = i;
            }
        }
        return std::make_pair(arg / static_cast<double>(n), best);
    };
    auto [xl, vl] = peak_near(exp_left - 1.0 + 1.0);  // 0.823
    auto [xr, vr] = peak_near(exp_right - 1.0);       // 0.177
    CHECK(std::fabs(xl - 0.823) < 0.02);
    CHECK(std::fabs(xr - 0.177) < 0.02);
    CHECK(vl == doctest::Approx(0.5).epsilon(0.05));
    CHECK(vr == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("x-dependent diagonal homogenized field runs stably in 2D") {
    auto gen = CoefficientField::locally_periodic1d(1.1, TrigTerm{0.5, 1, true},
                                                    TrigTerm{0.5, 1, true}, 0.05);
    auto ref = CoefficientField::diagonal_nd(2, gen).homogenized();
    auto f2 = [](const Point& x) {
        return std::exp(-((x[0] - 0.5) * (x[0] - 0.5) + (x[1] - 0.5) * (x[1] - 0.5)) / 0.01);
    };
    Trajectory traj = run_homogenized(ref, 2, f2, nullptr, 40, 0.5);
    double mx = 0.0;
    for (double v : traj.final_snapshot().u) mx = std::max(mx, std::fabs(v));
    CHECK(mx < 2.0);
}

TEST_CASE("constant medium: dns equals the homogenized run at matched steps") {
    auto field = CoefficientField::periodic1d(0.9, {}, 0.05);
    auto ref = field.homogenized();
    const int n = 640;
    double dt = 0.4 * (1.0 / n) / std::sqrt(0.9);
    Trajectory a = run_dns(field, gaussian(), nullptr, n, 0.3, 0.5, 0, dt);
    Trajectory b = run_homogenized(ref, 1, gaussian(), nullptr, n, 0.3, 0.5, 0, dt);
    for (int i = 0; i < n; ++i)
        CHECK(a.final_snapshot().u[i] == b.final_snapshot().u[i]);
}

TEST_CASE("dispersive solver") {
    const double abar = 0.458257569495584;
    const double eps = 0.05;
    const int n = 64;

    SUBCASE("beta = 0 is bit-identical to the homogenized run") {
        DispersiveConfig cfg{abar, 0.0, eps, n, 0.5, 0.5, 0};
        Trajectory disp = run_dispersive(cfg, [](double x) {
            return std::exp(-(x - 0.5) * (x - 0.5) / 0.01);
        });
        PeriodicGrid g;
        g.dim = 1;
        g.n = n;
        g.h = 1.0 / n;
        double dt_target = 0.5 * cfl_max_dt(g, abar);
        auto ref = HomogenizedReference::constant(1, Matrix3::diagonal(abar));
        Trajectory hom = run_homogenized(ref, 1, gaussian(), nullptr, n, 0.5, 0.5, 0, dt_target);
        REQUIRE(disp.steps == hom.steps);
        for (int i = 0; i < n; ++i)
            CHECK(disp.final_snapshot().u[i] == hom.final_snapshot().u[i]);
    }

    SUBCASE("plane-wave frequency shift follows the dispersion relation") {
        const int mode = 3;
        const double k = 2.0 * M_PI * mode;
        const double beta = 0.008;
        auto f = [&](double x) { return std::sin(k * x); };

        DispersiveConfig base{abar, 0.0, eps, n, 0.5, 0.4, 1};
        DispersiveConfig disp{abar, beta, eps, n, 0.5, 0.4, 1};
        double w0 = measure_frequency(run_dispersive(base, f), mode);
        double wb = measure_frequency(run_dispersive(disp, f), mode);

        double w0_exact = std::sqrt(abar) * k;
        double wb_exact = std::sqrt(abar * k * k - beta * eps * eps * k * k * k * k);
        CHECK(std::fabs(w0 - w0_exact) / w0_exact < 0.02);
        // The beta-induced shift is measured against the beta = 0 run on the
        // same grid, cancelling most discretization error.
        double shift = w0 - wb;
        double shift_exact = w0_exact - wb_exact;
        REQUIRE(shift_exact > 0.0);
        CHECK(std::fabs(shift - shift_exact) / shift_exact < 0.2);
    }

    SUBCASE("beta above the grid cutoff is rejected") {
        DispersiveConfig cfg{abar, 1.0, eps, n, 0.1, 0.5, 0};
        CHECK_THROWS_AS(run_dispersive(cfg, [](double) { return 0.0; }), Error);
    }
}

TEST_CASE("fit_beta") {
    const double abar = 0.458257569495584;
    const double eps = 0.05;
    const int n = 64;
    auto f = [](double x) { return std::exp(-(x - 0.5) * (x - 0.5) / 0.01); };

    SUBCASE("recovers the coefficient from data it generated") {
        const double beta0 = 0.008;
        DispersiveConfig cfg{abar, beta0, eps, n, 50.0, 0.5, 0};
        Trajectory truth = run_dispersive(cfg, f);
        BetaFit fit = fit_beta(truth.final_snapshot().u, n, 50.0, abar, eps, f, n);
        CHECK(std::fabs(fit.beta - beta0) <= 0.01 * beta0);
    }
    SUBCASE("non-dispersive data sends the fit to zero") {
        DispersiveConfig cfg{abar, 0.0, eps, n, 50.0, 0.5, 0};
        Trajectory truth = run_dispersive(cfg, f);
        BetaFit fit = fit_beta(truth.final_snapshot().u, n, 50.0, abar, eps, f, n);
        CHECK(fit.beta <= 0.02 * fit.beta_max);
    }
}

TEST_CASE("dns drifts toward the homogenized solution as eps shrinks") {
    auto ref = example1_field(0.05).homogenized();
    auto err_at = [&](double eps) {
        auto field = example1_field(eps);
        int n = static_cast<int>(std::llround(64.0 / eps));
        Trajectory dns = run_dns(field, gaussian(), nullptr, n, 1.0);
        Trajectory hom = run_homogenized(ref, 1, gaussian(), nullptr, n, 1.0);
        return grid_error(dns.final_snapshot().u, hom.final_snapshot().u, ErrorNorm::LInf, 1,
                          1.0 / n);
    };
    double e_coarse = err_at(0.05);
    double e_fine = err_at(0.025);
    CHECK(e_fine < e_coarse);
}
