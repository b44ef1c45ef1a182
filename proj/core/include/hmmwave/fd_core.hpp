#ifndef HMMWAVE_FD_CORE_HPP
#define HMMWAVE_FD_CORE_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "hmmwave/types.hpp"

namespace hmmwave {

// Uniform periodic grid on [origin, origin + n*h)^dim, node x_i = origin + i*h.
// Indexing wraps modulo n on every axis; linear index is x-fastest.
struct PeriodicGrid {
    int dim = 1;
    int n = 0;
    double h = 0.0;
    Point origin{};

    std::int64_t cell_count() const {
        std::int64_t c = 1;
        for (int k = 0; k < dim; ++k) c *= n;
        return c;
    }
    double extent() const { return n * h; }
    Point node(int i, int j = 0, int k = 0) const {
        return {origin[0] + i * h, origin[1] + j * h, origin[2] + k * h};
    }
    std::int64_t index(int i, int j = 0, int k = 0) const {
        return i + static_cast<std::int64_t>(n) * (j + static_cast<std::int64_t>(n) * k);
    }
    void validate() const;
};

// Two consecutive time levels of a grid function.
struct WaveState {
    std::vector<double> u_curr;
    std::vector<double> u_prev;
    double time = 0.0;
    std::int64_t step = 0;
};

// Coefficient access for the solver: full symmetric tensor per point. The
// diagonal flag skips the cross-difference stencil terms.
struct CoefficientSampler {
    std::function<Matrix3(const Point&)> eval;
    bool diagonal = true;
};

// Largest stable leapfrog step h / sqrt(dim * coeff_bound); callers scale by a
// safety ratio.
double cfl_max_dt(const PeriodicGrid& grid, double coeff_bound);

// Leapfrog engine for u_tt = div(A grad u) + s on a periodic grid. Face
// coefficients are evaluated analytically at face centers once, at
// construction. All sweeps are data-parallel over cells with no cross-thread
// reductions, so results do not depend on the worker count.
class WaveStepper {
  public:
    WaveStepper(const PeriodicGrid& grid, const CoefficientSampler& coeff);

    const PeriodicGrid& grid() const { return grid_; }

    // Optional time-independent forcing added to the flux divergence.
    void set_source(std::vector<double> source);

    // Second-order two-level start: u_prev = f, u_curr = f + dt*g +
    // (dt^2/2) * (div A grad f + s).
    WaveState initial_state(const std::function<double(const Point&)>& f,
                            const std::function<double(const Point&)>& g, double dt) const;

    // One leapfrog step; throws on instability (values above 1e12).
    void step(WaveState& state, double dt) const;

    // div(A grad u) + s at every cell.
    std::vector<double> apply_operator(const std::vector<double>& u) const;

    // Face fluxes f^(k) at half-indices (value at [k][index(m)] is the flux
    // through the face between m and m+e_k).
    std::array<std::vector<double>, 3> flux_faces(const std::vector<double>& u) const;

    // Adds w * (cell-centered flux of u) to acc[axis] over the index box
    // [lo, hi] (inclusive, must not wrap). Cell-centered flux along an axis is
    // the mean of the two adjacent face fluxes. acc[axis] is box-local,
    // x-fastest.
    void accumulate_center_flux(const std::vector<double>& u, const std::array<int, 3>& lo,
                                const std::array<int, 3>& hi, double w,
                                std::array<std::vector<double>, 3>& acc) const;

    // Cell-centered flux of the linear field p.x (exact, independent of any
    // unwrapping) over the same box layout.
    void add_linear_center_flux(const Point& p, const std::array<int, 3>& lo,
                                const std::array<int, 3>& hi, double w,
                                std::array<std::vector<double>, 3>& acc) const;

    // Discrete divergence of A grad (p.x): the forcing that turns the
    // deviation form of a micro problem into a source term.
    std::vector<double> linear_source(const Point& p) const;

    // Conserved leapfrog energy: kinetic term from the two stored levels plus
    // the mixed-level flux-form potential.
    double energy(const WaveState& state, double dt) const;

    const std::vector<double>& face_coefficient(int axis) const { return a_diag_[axis]; }

  private:
    template <int D> void build_faces(const CoefficientSampler& coeff);
    template <int D, bool Diag>
    void sweep_y(const double* u, double* y) const;
    template <int D, bool Diag>
    double sweep_step(const double* u, double* target, double dt2) const;
    template <int D, bool Diag>
    void sweep_accumulate(const double* u, const std::array<int, 3>& lo,
                          const std::array<int, 3>& hi, double w,
                          std::array<std::vector<double>, 3>& acc) const;

    PeriodicGrid grid_;
    bool diagonal_ = true;
    std::array<std::vector<double>, 3> a_diag_;               // a^{(kk)} at k-faces
    std::array<std::array<std::vector<double>, 3>, 3> a_off_; // a^{(kj)} at k-faces
    std::vector<double> source_;
    double inv_h_ = 0.0;
    double inv_h2_ = 0.0;
};

}  // namespace hmmwave

#endif
