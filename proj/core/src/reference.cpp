#include "hmmwave/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hmmwave {

namespace {

constexpr double kInstabilityLimit = 1e12;

Trajectory evolve(WaveStepper& stepper, const ScalarField& f, const ScalarField& g, double T,
                  double dt_target, std::int64_t stride) {
    Trajectory traj;
    traj.grid = stepper.grid();

    const PeriodicGrid& grid = stepper.grid();
    std::vector<double> f0(grid.cell_count());
    for (int k = 0; k < ((grid.dim == 3) ? grid.n : 1); ++k)
        for (int j = 0; j < ((grid.dim >= 2) ? grid.n : 1); ++j)
            for (int i = 0; i < grid.n; ++i) f0[grid.index(i, j, k)] = f(grid.node(i, j, k));
    traj.snapshots.push_back({0.0, f0});
    if (T <= 0.0) return traj;

    const std::int64_t steps = snap_steps(T, dt_target);
    const double dt = T / static_cast<double>(steps);
    traj.dt = dt;
    traj.steps = steps;

    WaveState state = stepper.initial_state(f, g, dt);
    auto maybe_snapshot = [&](const WaveState& s) {
        if (stride > 0 && s.step % stride == 0 && s.step != steps)
            traj.snapshots.push_back({s.time, s.u_curr});
    };
    maybe_snapshot(state);
    while (state.step < steps) {
        stepper.step(state, dt);
        maybe_snapshot(state);
    }
    traj.snapshots.push_back({T, state.u_curr});
    return traj;
}

// Upper bound of the reference coefficient over the grid for the time-step
// rule: closed forms vary slowly, so a sampled max with a small margin is
// enough.
double reference_bound(const HomogenizedReference& ref, int dim, int n) {
    double m = 0.0;
    for (int i = 0; i < 4 * n; ++i) {
        Point x{static_cast<double>(i) / (4.0 * n), 0.0, 0.0};
        Matrix3 a = ref.eval(x);
        for (int d = 0; d < dim; ++d) m = std::max(m, a(d, d));
    }
    return 1.05 * m;
}

}  // namespace

Trajectory run_dns(const CoefficientField& field, const ScalarField& f, const ScalarField& g,
                   int n, double T, double cfl, std::int64_t snapshot_stride,
                   double dt_target) {
    double eps_min = field.epsilon();
    for (double e : field.epsilon_list()) eps_min = std::min(eps_min, e);
    if (1.0 / n > eps_min / 32.0 + 1e-15)
        throw Error("dns: grid does not resolve the micro scale (need h <= eps/32)");

    PeriodicGrid grid;
    grid.dim = field.dimension();
    grid.n = n;
    grid.h = 1.0 / n;
    WaveStepper stepper(grid, {[&field](const Point& x) { return field.eval(x); }, true});
    double dt = (dt_target > 0.0) ? dt_target
                                  : cfl * cfl_max_dt(grid, field.sup_norm_bound());
    return evolve(stepper, f, g, T, dt, snapshot_stride);
}

Trajectory run_homogenized(const HomogenizedReference& reference, int dim, const ScalarField& f,
                           const ScalarField& g, int n, double T, double cfl,
                           std::int64_t snapshot_stride, double dt_target) {
    if (!reference.available())
        throw Error("homogenized run: reference coefficient unavailable");
    PeriodicGrid grid;
    grid.dim = dim;
    grid.n = n;
    grid.h = 1.0 / n;
    WaveStepper stepper(grid, {[reference](const Point& x) { return reference.eval(x); }, true});
    double dt = (dt_target > 0.0)
                    ? dt_target
                    : cfl * cfl_max_dt(grid, reference_bound(reference, dim, n));
    return evolve(stepper, f, g, T, dt, snapshot_stride);
}

Trajectory run_dispersive(const DispersiveConfig& config,
                          const std::function<double(double)>& f) {
    if (config.n < 8) throw Error("dispersive: need at least 8 cells");
    if (!(config.abar > 0.0)) throw Error("dispersive: abar must be positive");
    if (config.beta < 0.0) throw Error("dispersive: beta must be non-negative");
    if (!(config.eps > 0.0)) throw Error("dispersive: eps must be positive");

    const int n = config.n;
    const double h = 1.0 / n;

    // Grid cutoff keeps every mode oscillatory: modes with k above
    // sqrt(abar/beta)/eps grow in the continuous equation, so the grid must
    // not represent them.
    if (config.beta > 0.0) {
        double beta_limit = config.abar * h * h / (4.0 * config.eps * config.eps);
        if (config.beta > beta_limit * (1.0 + 1e-12))
            throw Error("dispersive: beta above the grid stability limit " +
                        std::to_string(beta_limit) + "; coarsen the grid or shrink beta");
    }

    PeriodicGrid grid;
    grid.dim = 1;
    grid.n = n;
    grid.h = h;

    double dt_target = config.cfl * cfl_max_dt(grid, config.abar);
    if (config.beta > 0.0) {
        double fourth = h * h / (2.0 * config.eps * std::sqrt(config.beta));
        dt_target = std::min(dt_target, config.cfl * fourth);
    }
    const std::int64_t steps = snap_steps(config.T, dt_target);
    const double dt = config.T / static_cast<double>(steps);
    const double dt2 = dt * dt;

    const double a = config.abar;
    const double inv_h2 = (1.0 / h) * (1.0 / h);
    const double coef4 = config.beta * config.eps * config.eps * inv_h2 * inv_h2;

    std::vector<double> u0(n), u1(n);
    for (int i = 0; i < n; ++i) u0[i] = f(i * h);

    // Same arithmetic as the flux-difference leapfrog core, plus the explicit
    // 5-point biharmonic term; with beta = 0 the update is bit-identical to
    // the homogenized run.
    auto rhs = [&](const std::vector<double>& u, int i) {
        const int ip = (i + 1 == n) ? 0 : i + 1;
        const int im = (i == 0) ? n - 1 : i - 1;
        const double c = u[i];
        double fp = a * (u[ip] - c);
        double fm = a * (c - u[im]);
        double div = 0.0;
        div += fp - fm;
        double y = div * inv_h2;
        if (config.beta > 0.0) {
            const int ipp = (ip + 1 == n) ? 0 : ip + 1;
            const int imm = (im == 0) ? n - 1 : im - 1;
            y += coef4 * (u[ipp] - 4.0 * u[ip] + 6.0 * c - 4.0 * u[im] + u[imm]);
        }
        return y;
    };

    Trajectory traj;
    traj.grid = grid;
    traj.dt = dt;
    traj.steps = steps;
    traj.snapshots.push_back({0.0, u0});
    if (config.T <= 0.0) return traj;

    const double half_dt2 = 0.5 * dt2;
    for (int i = 0; i < n; ++i) u1[i] = u0[i] + 0.0 + half_dt2 * rhs(u0, i);

    std::vector<double> next(n);
    std::int64_t step = 1;
    double t = dt;
    auto maybe_snapshot = [&](const std::vector<double>& u) {
        if (config.snapshot_stride > 0 && step % config.snapshot_stride == 0 && step != steps)
            traj.snapshots.push_back({t, u});
    };
    maybe_snapshot(u1);
    while (step < steps) {
        double mx = 0.0;
        for (int i = 0; i < n; ++i) {
            double nu = 2.0 * u1[i] - u0[i] + dt2 * rhs(u1, i);
            next[i] = nu;
            mx = std::max(mx, std::fabs(nu));
        }
        std::swap(u0, u1);
        std::swap(u1, next);
        t += dt;
        step += 1;
        if (!(mx < kInstabilityLimit))
            throw Error("dispersive: instability detected at step " + std::to_string(step));
        maybe_snapshot(u1);
    }
    traj.snapshots.push_back({config.T, u1});
    return traj;
}

BetaFit fit_beta(const std::vector<double>& dns_terminal, int dns_n, double T, double abar,
                 double eps, const std::function<double(double)>& f, int fit_n,
                 double beta_max) {
    if (static_cast<int>(dns_terminal.size()) != dns_n)
        throw Error("fit_beta: snapshot size does not match its grid");
    const double h = 1.0 / fit_n;
    if (beta_max <= 0.0) beta_max = 0.9 * abar * h * h / (4.0 * eps * eps);

    std::vector<double> target = restrict_to_grid(dns_terminal, dns_n, fit_n, 1);

    BetaFit fit;
    fit.beta_max = beta_max;
    auto mismatch = [&](double beta) {
        DispersiveConfig cfg;
        cfg.abar = abar;
        cfg.beta = beta;
        cfg.eps = eps;
        cfg.n = fit_n;
        cfg.T = T;
        Trajectory traj = run_dispersive(cfg, f);
        ++fit.evaluations;
        return grid_error(traj.final_snapshot().u, target, ErrorNorm::L2, 1, h);
    };

    // The terminal-time mismatch is not globally unimodal in beta (phase
    // wrapping over long horizons creates side lobes), so bracket the global
    // minimum with a coarse scan before golden-section refinement.
    const int scan_points = 25;
    int best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i < scan_points; ++i) {
        double beta = beta_max * i / (scan_points - 1.0);
        double v = mismatch(beta);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    if (best == scan_points - 1)
        throw Error("fit_beta: minimum sits on the upper search boundary " +
                    std::to_string(beta_max) + "; enlarge the search range or coarsen the grid");

    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = beta_max * std::max(best - 1, 0) / (scan_points - 1.0);
    double b = beta_max * std::min(best + 1, scan_points - 1) / (scan_points - 1.0);
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = mismatch(x1);
    double f2 = mismatch(x2);
    const double tol = 2e-3 * beta_max;
    while (b - a > tol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = mismatch(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = mismatch(x2);
        }
    }
    fit.beta = 0.5 * (a + b);
    fit.mismatch = std::min(f1, f2);
    return fit;
}

}  // namespace hmmwave
