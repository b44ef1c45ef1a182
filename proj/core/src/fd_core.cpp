#include "hmmwave/fd_core.hpp"

#include <algorithm>
#include <cmath>

#include "hmmwave/parallel.hpp"

namespace hmmwave {

namespace {

constexpr double kInstabilityLimit = 1e12;
constexpr std::int64_t kParallelCellThreshold = 1 << 15;

struct FaceView {
    const double* adiag[3] = {nullptr, nullptr, nullptr};
    const double* aoff[3][3] = {};
    const double* src = nullptr;
    double inv_h2 = 0.0;
    int n = 0;
};

// Neighbor offsets (in linear-index units) for cell position ia along an axis
// with stride `stride`, periodic wrap.
inline std::int64_t plus_offset(int ia, int n, std::int64_t stride) {
    return (ia + 1 == n) ? stride * (1 - static_cast<std::int64_t>(n)) : stride;
}
inline std::int64_t minus_offset(int ia, int n, std::int64_t stride) {
    return (ia == 0) ? stride * (static_cast<std::int64_t>(n) - 1) : -stride;
}

// Raw face fluxes (scaled by h: the physical flux is raw/h) through the two
// axis-a faces of the cell at idx. Appendix stencils: two-point difference
// with the diagonal coefficient at the half-point, four-point averaged cross
// differences for the off-diagonal terms.
template <int D, bool Diag>
inline void face_pair(const FaceView& v, const double* u, std::int64_t idx,
                      const std::int64_t* po, const std::int64_t* mo, int a, double& fp,
                      double& fm) {
    const double c = u[idx];
    fp = v.adiag[a][idx] * (u[idx + po[a]] - c);
    fm = v.adiag[a][idx + mo[a]] * (c - u[idx + mo[a]]);
    if constexpr (!Diag) {
        for (int b = 0; b < D; ++b) {
            if (b == a) continue;
            const double cross_p = 0.25 * (u[idx + po[b]] + u[idx + po[a] + po[b]] -
                                           u[idx + mo[b]] - u[idx + po[a] + mo[b]]);
            const double cross_m = 0.25 * (u[idx + po[b]] + u[idx + mo[a] + po[b]] -
                                           u[idx + mo[b]] - u[idx + mo[a] + mo[b]]);
            fp += v.aoff[a][b][idx] * cross_p;
            fm += v.aoff[a][b][idx + mo[a]] * cross_m;
        }
    }
}

template <int D, bool Diag>
inline double cell_y(const FaceView& v, const double* u, std::int64_t idx,
                     const std::int64_t* po, const std::int64_t* mo) {
    double div = 0.0;
    for (int a = 0; a < D; ++a) {
        double fp, fm;
        face_pair<D, Diag>(v, u, idx, po, mo, a, fp, fm);
        div += fp - fm;
    }
    double y = div * v.inv_h2;
    if (v.src) y += v.src[idx];
    return y;
}

enum class SweepMode { Y, Step };

// One pass over all cells. Mode Y writes div(A grad u)+s into out; mode Step
// writes the leapfrog update into out (which holds u_prev on entry) and
// returns max |u_new| for the instability guard.
template <int D, bool Diag, SweepMode Mode>
double full_sweep(const FaceView& v, const double* u, double* out, double dt2) {
    const int n = v.n;
    const std::int64_t n1 = n;
    const std::int64_t n2 = n1 * n1;

    auto run_outer = [&](int outer) -> double {
        double mx = 0.0;
        std::int64_t po[3] = {}, mo[3] = {};
        const int kk = (D == 3) ? outer : 0;
        const int jj = (D == 2) ? outer : 0;
        if constexpr (D == 3) {
            po[2] = plus_offset(kk, n, n2);
            mo[2] = minus_offset(kk, n, n2);
        }
        const int j_lo = (D == 3) ? 0 : jj;
        const int j_hi = (D == 3) ? n - 1 : jj;
        for (int j = j_lo; j <= j_hi; ++j) {
            if constexpr (D >= 2) {
                po[1] = plus_offset(j, n, n1);
                mo[1] = minus_offset(j, n, n1);
            }
            const std::int64_t base = (D >= 2) ? n1 * (j + ((D == 3) ? n1 * kk : 0)) : 0;
            for (int i = 0; i < n; ++i) {
                po[0] = plus_offset(i, n, 1);
                mo[0] = minus_offset(i, n, 1);
                const std::int64_t idx = base + i;
                const double y = cell_y<D, Diag>(v, u, idx, po, mo);
                if constexpr (Mode == SweepMode::Y) {
                    out[idx] = y;
                } else {
                    const double c = u[idx];
                    const double prev = out[idx];
                    const double nu = 2.0 * c - prev + dt2 * y;
                    out[idx] = nu;
                    mx = std::max(mx, std::fabs(nu));
                }
            }
        }
        return mx;
    };

    const std::int64_t outer_count = (D == 1) ? 1 : n;
    const std::int64_t cells = (D == 1) ? n1 : ((D == 2) ? n2 : n2 * n1);
    if (outer_count > 1 && cells >= kParallelCellThreshold) {
        std::vector<double> maxima(outer_count, 0.0);
        parallel_for_blocks(outer_count,
                            [&](std::int64_t o) { maxima[o] = run_outer(static_cast<int>(o)); });
        return *std::max_element(maxima.begin(), maxima.end());
    }
    double mx = 0.0;
    for (std::int64_t o = 0; o < outer_count; ++o) mx = std::max(mx, run_outer(static_cast<int>(o)));
    return mx;
}

}  // namespace

void PeriodicGrid::validate() const {
    if (dim < 1 || dim > 3) throw Error("grid: dimension must be 1, 2 or 3");
    if (n < 4) throw Error("grid: need at least 4 cells per axis");
    if (!(h > 0.0)) throw Error("grid: spacing must be positive");
}

double cfl_max_dt(const PeriodicGrid& grid, double coeff_bound) {
    if (!(coeff_bound > 0.0)) throw Error("cfl_max_dt: coefficient bound must be positive");
    return grid.h / std::sqrt(static_cast<double>(grid.dim) * coeff_bound);
}

WaveStepper::WaveStepper(const PeriodicGrid& grid, const CoefficientSampler& coeff)
    : grid_(grid), diagonal_(coeff.diagonal) {
    grid_.validate();
    inv_h_ = 1.0 / grid_.h;
    inv_h2_ = inv_h_ * inv_h_;
    switch (grid_.dim) {
        case 1: build_faces<1>(coeff); break;
        case 2: build_faces<2>(coeff); break;
        default: build_faces<3>(coeff); break;
    }
}

template <int D>
void WaveStepper::build_faces(const CoefficientSampler& coeff) {
    const int n = grid_.n;
    const std::int64_t cells = grid_.cell_count();
    for (int a = 0; a < D; ++a) {
        a_diag_[a].resize(cells);
        if (!diagonal_)
            for (int b = 0; b < D; ++b)
                if (b != a) a_off_[a][b].resize(cells);
    }
    const std::int64_t outer = (D == 1) ? 1 : n;
    auto fill_outer = [&](std::int64_t o) {
        const int kk = (D == 3) ? static_cast<int>(o) : 0;
        const int jj = (D == 2) ? static_cast<int>(o) : 0;
        const int j_lo = (D == 3) ? 0 : jj;
        const int j_hi = (D == 3) ? n - 1 : jj;
        for (int j = j_lo; j <= j_hi; ++j) {
            for (int i = 0; i < n; ++i) {
                const std::int64_t idx = grid_.index(i, j, kk);
                for (int a = 0; a < D; ++a) {
                    Point x = grid_.node(i, j, kk);
                    x[a] += 0.5 * grid_.h;
                    Matrix3 m = coeff.eval(x);
                    a_diag_[a][idx] = m(a, a);
                    if (!diagonal_)
                        for (int b = 0; b < D; ++b)
                            if (b != a) a_off_[a][b][idx] = m(a, b);
                }
            }
        }
    };
    if (outer > 1 && cells >= kParallelCellThreshold) {
        parallel_for_blocks(outer, fill_outer);
    } else {
        for (std::int64_t o = 0; o < outer; ++o) fill_outer(o);
    }
}

void WaveStepper::set_source(std::vector<double> source) {
    if (!source.empty() && static_cast<std::int64_t>(source.size()) != grid_.cell_count())
        throw Error("fd_core: source size does not match the grid");
    source_ = std::move(source);
}

WaveState WaveStepper::initial_state(const std::function<double(const Point&)>& f,
                                     const std::function<double(const Point&)>& g,
                                     double dt) const {
    const std::int64_t cells = grid_.cell_count();
    WaveState s;
    s.u_prev.resize(cells);
    s.u_curr.resize(cells);
    const int n = grid_.n;
    for (int k = 0; k < ((grid_.dim == 3) ? n : 1); ++k)
        for (int j = 0; j < ((grid_.dim >= 2) ? n : 1); ++j)
            for (int i = 0; i < n; ++i) s.u_prev[grid_.index(i, j, k)] = f(grid_.node(i, j, k));

    std::vector<double> y = apply_operator(s.u_prev);
    const double half_dt2 = 0.5 * dt * dt;
    for (int k = 0; k < ((grid_.dim == 3) ? n : 1); ++k)
        for (int j = 0; j < ((grid_.dim >= 2) ? n : 1); ++j)
            for (int i = 0; i < n; ++i) {
                const std::int64_t idx = grid_.index(i, j, k);
                double gv = g ? g(grid_.node(i, j, k)) : 0.0;
                s.u_curr[idx] = s.u_prev[idx] + dt * gv + half_dt2 * y[idx];
            }
    s.time = dt;
    s.step = 1;
    return s;
}

void WaveStepper::step(WaveState& state, double dt) const {
    FaceView v;
    for (int a = 0; a < grid_.dim; ++a) {
        v.adiag[a] = a_diag_[a].data();
        if (!diagonal_)
            for (int b = 0; b < grid_.dim; ++b)
                if (b != a) v.aoff[a][b] = a_off_[a][b].data();
    }
    v.src = source_.empty() ? nullptr : source_.data();
    v.inv_h2 = inv_h2_;
    v.n = grid_.n;

    const double dt2 = dt * dt;
    double mx = 0.0;
    const double* u = state.u_curr.data();
    double* tgt = state.u_prev.data();
    if (diagonal_) {
        switch (grid_.dim) {
            case 1: mx = full_sweep<1, true, SweepMode::Step>(v, u, tgt, dt2); break;
            case 2: mx = full_sweep<2, true, SweepMode::Step>(v, u, tgt, dt2); break;
            default: mx = full_sweep<3, true, SweepMode::Step>(v, u, tgt, dt2); break;
        }
    } else {
        switch (grid_.dim) {
            case 1: mx = full_sweep<1, false, SweepMode::Step>(v, u, tgt, dt2); break;
            case 2: mx = full_sweep<2, false, SweepMode::Step>(v, u, tgt, dt2); break;
            default: mx = full_sweep<3, false, SweepMode::Step>(v, u, tgt, dt2); break;
        }
    }
    std::swap(state.u_curr, state.u_prev);
    state.time += dt;
    state.step += 1;
    if (!(mx < kInstabilityLimit))
        throw Error("fd_core: instability detected at step " + std::to_string(state.step) +
                    " (max |u| = " + std::to_string(mx) + "); check the CFL condition");
}

std::vector<double> WaveStepper::apply_operator(const std::vector<double>& u) const {
    if (static_cast<std::int64_t>(u.size()) != grid_.cell_count())
        throw Error("fd_core: field size does not match the grid");
    FaceView v;
    for (int a = 0; a < grid_.dim; ++a) {
        v.adiag[a] = a_diag_[a].data();
        if (!diagonal_)
            for (int b = 0; b < grid_.dim; ++b)
                if (b != a) v.aoff[a][b] = a_off_[a][b].data();
    }
    v.src = source_.empty() ? nullptr : source_.data();
    v.inv_h2 = inv_h2_;
    v.n = grid_.n;

    std::vector<double> y(u.size());
    if (diagonal_) {
        switch (grid_.dim) {
            case 1: full_sweep<1, true, SweepMode::Y>(v, u.data(), y.data(), 0.0); break;
            case 2: full_sweep<2, true, SweepMode::Y>(v, u.data(), y.data(), 0.0); break;
            default: full_sweep<3, true, SweepMode::Y>(v, u.data(), y.data(), 0.0); break;
        }
    } else {
        switch (grid_.dim) {
            case 1: full_sweep<1, false, SweepMode::Y>(v, u.data(), y.data(), 0.0); break;
            case 2: full_sweep<2, false, SweepMode::Y>(v, u.data(), y.data(), 0.0); break;
            default: full_sweep<3, false, SweepMode::Y>(v, u.data(), y.data(), 0.0); break;
        }
    }
    return y;
}

std::array<std::vector<double>, 3> WaveStepper::flux_faces(const std::vector<double>& u) const {
    if (static_cast<std::int64_t>(u.size()) != grid_.cell_count())
        throw Error("fd_core: field size does not match the grid");
    FaceView v;
    for (int a = 0; a < grid_.dim; ++a) {
        v.adiag[a] = a_diag_[a].data();
        if (!diagonal_)
            for (int b = 0; b < grid_.dim; ++b)
                if (b != a) v.aoff[a][b] = a_off_[a][b].data();
    }
    v.inv_h2 = inv_h2_;
    v.n = grid_.n;

    std::array<std::vector<double>, 3> faces;
    const int n = grid_.n;
    const int D = grid_.dim;
    for (int a = 0; a < D; ++a) faces[a].assign(grid_.cell_count(), 0.0);

    std::int64_t po[3] = {}, mo[3] = {};
    for (int k = 0; k < ((D == 3) ? n : 1); ++k) {
        if (D == 3) {
            po[2] = plus_offset(k, n, static_cast<std::int64_t>(n) * n);
            mo[2] = minus_offset(k, n, static_cast<std::int64_t>(n) * n);
        }
        for (int j = 0; j < ((D >= 2) ? n : 1); ++j) {
            if (D >= 2) {
                po[1] = plus_offset(j, n, n);
                mo[1] = minus_offset(j, n, n);
            }
            for (int i = 0; i < n; ++i) {
                po[0] = plus_offset(i, n, 1);
                mo[0] = minus_offset(i, n, 1);
                const std::int64_t idx = grid_.index(i, j, k);
                for (int a = 0; a < D; ++a) {
                    double fp, fm;
                    if (diagonal_) {
                        switch (D) {
                            case 1: face_pair<1, true>(v, u.data(), idx, po, mo, a, fp, fm); break;
                            case 2: face_pair<2, true>(v, u.data(), idx, po, mo, a, fp, fm); break;
                            default: face_pair<3, true>(v, u.data(), idx, po, mo, a, fp, fm); break;
                        }
                    } else {
                        switch (D) {
                            case 1: face_pair<1, false>(v, u.data(), idx, po, mo, a, fp, fm); break;
                            case 2: face_pair<2, false>(v, u.data(), idx, po, mo, a, fp, fm); break;
                            default: face_pair<3, false>(v, u.data(), idx, po, mo, a, fp, fm); break;
                        }
                    }
                    faces[a][idx] = fp * inv_h_;
                }
            }
        }
    }
    return faces;
}

template <int D, bool Diag>
void WaveStepper::sweep_accumulate(const double* u, const std::array<int, 3>& lo,
                                   const std::array<int, 3>& hi, double w,
                                   std::array<std::vector<double>, 3>& acc) const {
    FaceView v;
    for (int a = 0; a < D; ++a) {
        v.adiag[a] = a_diag_[a].data();
        if constexpr (!Diag)
            for (int b = 0; b < D; ++b)
                if (b != a) v.aoff[a][b] = a_off_[a][b].data();
    }
    v.inv_h2 = inv_h2_;
    v.n = grid_.n;

    const int n = grid_.n;
    const std::array<int, 3> bw = {hi[0] - lo[0] + 1, (D >= 2) ? hi[1] - lo[1] + 1 : 1,
                                   (D == 3) ? hi[2] - lo[2] + 1 : 1};
    const double half_w_inv_h = 0.5 * w * inv_h_;

    const std::int64_t outer_count = (D == 3) ? bw[2] : ((D == 2) ? bw[1] : 1);
    auto run_outer = [&](std::int64_t o) {
        std::int64_t po[3] = {}, mo[3] = {};
        const int k = (D == 3) ? lo[2] + static_cast<int>(o) : 0;
        if constexpr (D == 3) {
            po[2] = plus_offset(k, n, static_cast<std::int64_t>(n) * n);
            mo[2] = minus_offset(k, n, static_cast<std::int64_t>(n) * n);
        }
        const int j_lo = (D == 3) ? lo[1] : ((D == 2) ? lo[1] + static_cast<int>(o) : 0);
        const int j_hi = (D == 3) ? hi[1] : j_lo;
        for (int j = j_lo; j <= j_hi; ++j) {
            if constexpr (D >= 2) {
                po[1] = plus_offset(j, n, n);
                mo[1] = minus_offset(j, n, n);
            }
            for (int i = lo[0]; i <= hi[0]; ++i) {
                po[0] = plus_offset(i, n, 1);
                mo[0] = minus_offset(i, n, 1);
                const std::int64_t idx = grid_.index(i, j, k);
                const std::int64_t local =
                    (i - lo[0]) +
                    static_cast<std::int64_t>(bw[0]) *
                        ((D >= 2 ? j - lo[1] : 0) +
                         static_cast<std::int64_t>(bw[1]) * (D == 3 ? k - lo[2] : 0));
                for (int a = 0; a < D; ++a) {
                    double fp, fm;
                    face_pair<D, Diag>(v, u, idx, po, mo, a, fp, fm);
                    acc[a][local] += half_w_inv_h * (fp + fm);
                }
            }
        }
    };
    const std::int64_t box_cells =
        static_cast<std::int64_t>(bw[0]) * bw[1] * bw[2];
    if (outer_count > 1 && box_cells >= kParallelCellThreshold) {
        parallel_for_blocks(outer_count, run_outer);
    } else {
        for (std::int64_t o = 0; o < outer_count; ++o) run_outer(o);
    }
}

void WaveStepper::accumulate_center_flux(const std::vector<double>& u,
                                         const std::array<int, 3>& lo,
                                         const std::array<int, 3>& hi, double w,
                                         std::array<std::vector<double>, 3>& acc) const {
    for (int a = 0; a < grid_.dim; ++a) {
        if (lo[a] < 0 || hi[a] >= grid_.n || lo[a] > hi[a])
            throw Error("fd_core: accumulation box must lie inside the grid");
    }
    if (diagonal_) {
        switch (grid_.dim) {
            case 1: sweep_accumulate<1, true>(u.data(), lo, hi, w, acc); break;
            case 2: sweep_accumulate<2, true>(u.data(), lo, hi, w, acc); break;
            default: sweep_accumulate<3, true>(u.data(), lo, hi, w, acc); break;
        }
    } else {
        switch (grid_.dim) {
            case 1: sweep_accumulate<1, false>(u.data(), lo, hi, w, acc); break;
            case 2: sweep_accumulate<2, false>(u.data(), lo, hi, w, acc); break;
            default: sweep_accumulate<3, false>(u.data(), lo, hi, w, acc); break;
        }
    }
}

void WaveStepper::add_linear_center_flux(const Point& p, const std::array<int, 3>& lo,
                                         const std::array<int, 3>& hi, double w,
                                         std::array<std::vector<double>, 3>& acc) const {
    const int D = grid_.dim;
    const int n = grid_.n;
    const std::array<int, 3> bw = {hi[0] - lo[0] + 1, (D >= 2) ? hi[1] - lo[1] + 1 : 1,
                                   (D == 3) ? hi[2] - lo[2] + 1 : 1};
    std::int64_t mo[3];
    for (int k = (D == 3) ? lo[2] : 0; k <= ((D == 3) ? hi[2] : 0); ++k) {
        if (D == 3) mo[2] = minus_offset(k, n, static_cast<std::int64_t>(n) * n);
        for (int j = (D >= 2) ? lo[1] : 0; j <= ((D >= 2) ? hi[1] : 0); ++j) {
            if (D >= 2) mo[1] = minus_offset(j, n, n);
            for (int i = lo[0]; i <= hi[0]; ++i) {
                mo[0] = minus_offset(i, n, 1);
                const std::int64_t idx = grid_.index(i, j, k);
                const std::int64_t local =
                    (i - lo[0]) +
                    static_cast<std::int64_t>(bw[0]) *
                        ((D >= 2 ? j - lo[1] : 0) +
                         static_cast<std::int64_t>(bw[1]) * (D == 3 ? k - lo[2] : 0));
                for (int a = 0; a < D; ++a) {
                    double plus = a_diag_[a][idx] * p[a];
                    double minus = a_diag_[a][idx + mo[a]] * p[a];
                    if (!diagonal_) {
                        for (int b = 0; b < D; ++b) {
                            if (b == a) continue;
                            plus += a_off_[a][b][idx] * p[b];
                            minus += a_off_[a][b][idx + mo[a]] * p[b];
                        }
                    }
                    acc[a][local] += w * 0.5 * (plus + minus);
                }
            }
        }
    }
}

std::vector<double> WaveStepper::linear_source(const Point& p) const {
    const int D = grid_.dim;
    const int n = grid_.n;
    std::vector<double> s(grid_.cell_count());
    std::int64_t mo[3];
    for (int k = 0; k < ((D == 3) ? n : 1); ++k) {
        if (D == 3) mo[2] = minus_offset(k, n, static_cast<std::int64_t>(n) * n);
        for (int j = 0; j < ((D >= 2) ? n : 1); ++j) {
            if (D >= 2) mo[1] = minus_offset(j, n, n);
            for (int i = 0; i < n; ++i) {
                mo[0] = minus_offset(i, n, 1);
                const std::int64_t idx = grid_.index(i, j, k);
                double div = 0.0;
                for (int a = 0; a < D; ++a) {
                    double plus = a_diag_[a][idx] * p[a];
                    double minus = a_diag_[a][idx + mo[a]] * p[a];
                    if (!diagonal_) {
                        for (int b = 0; b < D; ++b) {
                            if (b == a) continue;
                            plus += a_off_[a][b][idx] * p[b];
                            minus += a_off_[a][b][idx + mo[a]] * p[b];
                        }
                    }
                    div += plus - minus;
                }
                s[idx] = div * inv_h_;
            }
        }
    }
    return s;
}

double WaveStepper::energy(const WaveState& state, double dt) const {
    const int D = grid_.dim;
    const int n = grid_.n;
    const double hd = std::pow(grid_.h, D);
    const double inv_dt = 1.0 / dt;

    double kinetic = 0.0;
    for (std::size_t i = 0; i < state.u_curr.size(); ++i) {
        double vyel = (state.u_curr[i] - state.u_prev[i]) * inv_dt;
        kinetic += vyel * vyel;
    }

    // Mixed-level potential: sum over faces of f(u_curr) . grad(u_prev); this
    // is the quantity the leapfrog recursion conserves exactly.
    auto faces_curr = flux_faces(state.u_curr);
    double potential = 0.0;
    std::int64_t po[3] = {};
    for (int k = 0; k < ((D == 3) ? n : 1); ++k) {
        if (D == 3) po[2] = plus_offset(k, n, static_cast<std::int64_t>(n) * n);
        for (int j = 0; j < ((D >= 2) ? n : 1); ++j) {
            if (D >= 2) po[1] = plus_offset(j, n, n);
            for (int i = 0; i < n; ++i) {
                po[0] = plus_offset(i, n, 1);
                const std::int64_t idx = grid_.index(i, j, k);
                for (int a = 0; a < D; ++a) {
                    double grad_prev = (state.u_prev[idx + po[a]] - state.u_prev[idx]) * inv_h_;
                    potential += faces_curr[a][idx] * grad_prev;
                }
            }
        }
    }
    return 0.5 * hd * (kinetic + potential);
}

}  // namespace hmmwave
