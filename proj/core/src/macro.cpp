#include "hmmwave/macro.hpp"

#include <algorithm>
#include <cmath>

#include "hmmwave/parallel.hpp"

namespace hmmwave {

namespace {

constexpr double kInstabilityLimit = 1e12;

inline std::int64_t plus_offset(int ia, int n, std::int64_t stride) {
    return (ia + 1 == n) ? stride * (1 - static_cast<std::int64_t>(n)) : stride;
}
inline std::int64_t minus_offset(int ia, int n, std::int64_t stride) {
    return (ia == 0) ? stride * (static_cast<std::int64_t>(n) - 1) : -stride;
}

// Pre-resolves linear providers to per-face basis values and sweeps the
// central-difference update; face fluxes within a step are data-parallel.
class MacroStepper {
  public:
    MacroStepper(const PeriodicGrid& grid, const FluxProvider& provider)
        : grid_(grid), provider_(&provider), linear_(provider.linear()) {
        grid_.validate();
        inv_h_ = 1.0 / grid_.h;
        const std::int64_t cells = grid_.cell_count();
        for (int a = 0; a < grid_.dim; ++a) {
            flux_[a].assign(cells, 0.0);
            if (linear_)
                for (int i = 0; i < grid_.dim; ++i) basis_[a][i].assign(cells, 0.0);
        }
        if (linear_) resolve_bases();
    }

    const PeriodicGrid& grid() const { return grid_; }

    std::vector<double> apply_operator(const std::vector<double>& u) const {
        fill_fluxes(u);
        std::vector<double> y(u.size());
        divergence_sweep(u.data(), nullptr, y.data(), 0.0);
        return y;
    }

    void step(WaveState& state, double dt) const {
        fill_fluxes(state.u_curr);
        double mx = divergence_sweep(state.u_curr.data(), state.u_prev.data(), nullptr, dt * dt);
        std::swap(state.u_curr, state.u_prev);
        state.time += dt;
        state.step += 1;
        if (!(mx < kInstabilityLimit))
            throw Error("macro: instability detected at step " + std::to_string(state.step) +
                        "; check the time step against the flux bound");
    }

  private:
    void resolve_bases() {
        const int n = grid_.n;
        const int D = grid_.dim;
        auto fill = [&](std::int64_t o) {
            const int kk = (D == 3) ? static_cast<int>(o) : 0;
            const int jj = (D == 2) ? static_cast<int>(o) : 0;
            const int j_lo = (D == 3) ? 0 : jj;
            const int j_hi = (D == 3) ? n - 1 : jj;
            for (int j = j_lo; j <= j_hi; ++j)
                for (int i = 0; i < n; ++i) {
                    const std::int64_t idx = grid_.index(i, j, kk);
                    for (int a = 0; a < D; ++a) {
                        Point x = grid_.node(i, j, kk);
                        x[a] += 0.5 * grid_.h;
                        FluxBasis b = provider_->basis(x);
                        for (int col = 0; col < D; ++col)
                            basis_[a][col][idx] = b.columns[col][a];
                    }
                }
        };
        const std::int64_t outer = (D == 1) ? 1 : n;
        if (outer > 1) {
            parallel_for_blocks(outer, fill);
        } else {
            fill(0);
        }
    }

    // Gradient stencil at the face (cell idx, +e_a/2).
    inline void face_gradient(const double* u, std::int64_t idx, const std::int64_t* po,
                              const std::int64_t* mo, int a, double* P) const {
        const int D = grid_.dim;
        P[a] = (u[idx + po[a]] - u[idx]) * inv_h_;
        for (int b = 0; b < D; ++b) {
            if (b == a) continue;
            P[b] = 0.25 * inv_h_ *
                   (u[idx + po[b]] + u[idx + po[a] + po[b]] - u[idx + mo[b]] -
                    u[idx + po[a] + mo[b]]);
        }
    }

    void fill_fluxes(const std::vector<double>& u) const {
        const int n = grid_.n;
        const int D = grid_.dim;
        const std::int64_t n1 = n;
        const std::int64_t n2 = n1 * n1;
        auto run_outer = [&](std::int64_t o) {
            std::int64_t po[3] = {}, mo[3] = {};
            const int kk = (D == 3) ? static_cast<int>(o) : 0;
            const int jj = (D == 2) ? static_cast<int>(o) : 0;
            if (D == 3) {
                po[2] = plus_offset(kk, n, n2);
                mo[2] = minus_offset(kk, n, n2);
            }
            const int j_lo = (D == 3) ? 0 : jj;
            const int j_hi = (D == 3) ? n - 1 : jj;
            for (int j = j_lo; j <= j_hi; ++j) {
                if (D >= 2) {
                    po[1] = plus_offset(j, n, n1);
                    mo[1] = minus_offset(j, n, n1);
                }
                for (int i = 0; i < n; ++i) {
                    po[0] = plus_offset(i, n, 1);
                    mo[0] = minus_offset(i, n, 1);
                    const std::int64_t idx = grid_.index(i, j, kk);
                    double P[3] = {0.0, 0.0, 0.0};
                    for (int a = 0; a < D; ++a) {
                        face_gradient(u.data(), idx, po, mo, a, P);
                        if (linear_) {
                            double f = 0.0;
                            for (int col = 0; col < D; ++col)
                                f += P[col] * basis_[a][col][idx];
                            flux_[a][idx] = f;
                        } else {
                            Point x = grid_.node(i, j, kk);
                            x[a] += 0.5 * grid_.h;
                            Point Pv{P[0], P[1], P[2]};
                            flux_[a][idx] = provider_->flux(x, Pv)[a];
                        }
                    }
                }
            }
        };
        const std::int64_t outer = (D == 1) ? 1 : n;
        if (linear_ && outer > 1 && grid_.cell_count() >= (1 << 14)) {
            parallel_for_blocks(outer, run_outer);
        } else {
            for (std::int64_t o = 0; o < outer; ++o) run_outer(o);
        }
    }

    // y = flux divergence; in step mode writes the leapfrog update into prev.
    double divergence_sweep(const double* u, double* prev, double* yout, double dt2) const {
        const int n = grid_.n;
        const int D = grid_.dim;
        const std::int64_t n1 = n;
        const std::int64_t n2 = n1 * n1;
        std::vector<double> maxima;
        const std::int64_t outer = (D == 1) ? 1 : n;
        maxima.assign(outer, 0.0);
        auto run_outer = [&](std::int64_t o) {
            double mx = 0.0;
            std::int64_t mo[3] = {};
            const int kk = (D == 3) ? static_cast<int>(o) : 0;
            const int jj = (D == 2) ? static_cast<int>(o) : 0;
            if (D == 3) mo[2] = minus_offset(kk, n, n2);
            const int j_lo = (D == 3) ? 0 : jj;
            const int j_hi = (D == 3) ? n - 1 : jj;
            for (int j = j_lo; j <= j_hi; ++j) {
                if (D >= 2) mo[1] = minus_offset(j, n, n1);
                for (int i = 0; i < n; ++i) {
                    mo[0] = minus_offset(i, n, 1);
                    const std::int64_t idx = grid_.index(i, j, kk);
                    double div = 0.0;
                    for (int a = 0; a < D; ++a)
                        div += flux_[a][idx] - flux_[a][idx + mo[a]];
                    const double y = div * inv_h_;
                    if (yout) {
                        yout[idx] = y;
                    } else {
                        const double c = u[idx];
                        const double pv = prev[idx];
                        const double nu = 2.0 * c - pv + dt2 * y;
                        prev[idx] = nu;
                        mx = std::max(mx, std::fabs(nu));
                    }
                }
            }
            maxima[o] = mx;
        };
        if (outer > 1 && grid_.cell_count() >= (1 << 14)) {
            parallel_for_blocks(outer, run_outer);
        } else {
            for (std::int64_t o = 0; o < outer; ++o) run_outer(o);
        }
        return *std::max_element(maxima.begin(), maxima.end());
    }

    PeriodicGrid grid_;
    const FluxProvider* provider_;
    bool linear_;
    double inv_h_ = 0.0;
    std::array<std::array<std::vector<double>, 3>, 3> basis_;  // [face axis][column]
    mutable std::array<std::vector<double>, 3> flux_;
};

}  // namespace

FluxBasis FluxProvider::basis(const Point&) const {
    throw Error("flux provider: basis() not available on a non-linear provider");
}

Point FluxProvider::flux(const Point& face_point, const Point& p) const {
    FluxBasis b = basis(face_point);
    Point f{};
    for (int i = 0; i < 3; ++i)
        for (int ax = 0; ax < 3; ++ax) f[ax] += p[i] * b.columns[i][ax];
    return f;
}

ExactFluxProvider::ExactFluxProvider(int dim, HomogenizedReference reference)
    : dim_(dim), ref_(std::move(reference)) {
    if (!ref_.available())
        throw Error("exact flux provider: homogenized reference unavailable");
}

ExactFluxProvider::ExactFluxProvider(int dim, const Matrix3& matrix)
    : dim_(dim), ref_(HomogenizedReference::constant(dim, matrix)) {}

FluxBasis ExactFluxProvider::basis(const Point& face_point) const {
    Matrix3 m = ref_.eval(face_point);
    FluxBasis b;
    for (int i = 0; i < dim_; ++i)
        for (int ax = 0; ax < dim_; ++ax) b.columns[i][ax] = m(ax, i);
    return b;
}

Point DirectMicroProvider::flux(const Point& face_point, const Point& p) const {
    solves_.fetch_add(1);
    MicroProblemSpec spec = assemble(face_point, p, params_, *field_);
    return solve_and_average(spec, *field_);
}

Point gradient_stencil(const std::vector<double>& u, const PeriodicGrid& grid,
                       const std::array<int, 3>& m, int axis, int side) {
    if (axis < 0 || axis >= grid.dim) throw Error("gradient stencil: bad axis");
    if (side != 1 && side != -1) throw Error("gradient stencil: side must be +1 or -1");
    const int n = grid.n;
    std::array<int, 3> cell = m;
    if (side == -1) cell[axis] = (cell[axis] + n - 1) % n;  // face (m, -e/2) = (m - e, +e/2)

    std::int64_t po[3] = {}, mo[3] = {};
    const std::int64_t strides[3] = {1, n, static_cast<std::int64_t>(n) * n};
    for (int a = 0; a < grid.dim; ++a) {
        po[a] = plus_offset(cell[a], n, strides[a]);
        mo[a] = minus_offset(cell[a], n, strides[a]);
    }
    const std::int64_t idx = grid.index(cell[0], cell[1], cell[2]);
    const double inv_h = 1.0 / grid.h;
    Point P{};
    P[axis] = (u[idx + po[axis]] - u[idx]) * inv_h;
    for (int b = 0; b < grid.dim; ++b) {
        if (b == axis) continue;
        P[b] = 0.25 * inv_h *
               (u[idx + po[b]] + u[idx + po[axis] + po[b]] - u[idx + mo[b]] -
                u[idx + po[axis] + mo[b]]);
    }
    return P;
}

void hmm_step(WaveState& state, const FluxProvider& provider, const PeriodicGrid& grid,
              double dt) {
    MacroStepper stepper(grid, provider);
    stepper.step(state, dt);
}

Trajectory run_macro(const MacroRunConfig& config, const FluxProvider& provider) {
    if (config.n < 4) throw Error("macro: need at least 4 cells per axis");
    if (!(config.coeff_bound > 0.0)) throw Error("macro: coefficient bound must be positive");
    if (config.T < 0.0) throw Error("macro: negative end time");

    PeriodicGrid grid;
    grid.dim = config.dim;
    grid.n = config.n;
    grid.h = 1.0 / config.n;

    Trajectory traj;
    traj.grid = grid;

    auto sample = [&](const std::function<double(const Point&)>& fn) {
        std::vector<double> v(grid.cell_count());
        for (int k = 0; k < ((grid.dim == 3) ? grid.n : 1); ++k)
            for (int j = 0; j < ((grid.dim >= 2) ? grid.n : 1); ++j)
                for (int i = 0; i < grid.n; ++i) v[grid.index(i, j, k)] = fn(grid.node(i, j, k));
        return v;
    };

    std::vector<double> f0 = sample(config.f);
    traj.snapshots.push_back({0.0, f0});
    if (config.T == 0.0) return traj;

    const double dt_target = (config.dt_target > 0.0)
                                 ? config.dt_target
                                 : config.cfl * cfl_max_dt(grid, config.coeff_bound);
    const std::int64_t steps = snap_steps(config.T, dt_target);
    const double dt = config.T / static_cast<double>(steps);
    traj.dt = dt;
    traj.steps = steps;

    MacroStepper stepper(grid, provider);

    WaveState state;
    state.u_prev = std::move(f0);
    std::vector<double> y = stepper.apply_operator(state.u_prev);
    state.u_curr.resize(state.u_prev.size());
    const double half_dt2 = 0.5 * dt * dt;
    for (std::size_t i = 0; i < state.u_curr.size(); ++i) {
        double gv = config.g ? config.g(grid.node(static_cast<int>(i % grid.n),
                                                  static_cast<int>((i / grid.n) % grid.n),
                                                  static_cast<int>(i / (static_cast<std::int64_t>(grid.n) * grid.n))))
                             : 0.0;
        state.u_curr[i] = state.u_prev[i] + dt * gv + half_dt2 * y[i];
    }
    state.time = dt;
    state.step = 1;

    auto maybe_snapshot = [&](const WaveState& s) {
        if (config.snapshot_stride > 0 && s.step % config.snapshot_stride == 0 &&
            s.step != steps)
            traj.snapshots.push_back({s.time, s.u_curr});
    };
    maybe_snapshot(state);
    while (state.step < steps) {
        stepper.step(state, dt);
        maybe_snapshot(state);
    }
    traj.snapshots.push_back({config.T, state.u_curr});
    return traj;
}

}  // namespace hmmwave
