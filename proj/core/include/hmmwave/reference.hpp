#ifndef HMMWAVE_REFERENCE_HPP
#define HMMWAVE_REFERENCE_HPP

#include <functional>

#include "hmmwave/coefficient.hpp"
#include "hmmwave/trajectory.hpp"

namespace hmmwave {

using ScalarField = std::function<double(const Point&)>;

// Direct numerical simulation of the oscillatory problem on [0,1]^dim;
// requires the fine grid to resolve the micro scale (h <= eps/32).
// dt_target > 0 replaces the cfl rule (both are snapped so that T is an
// integer number of steps).
Trajectory run_dns(const CoefficientField& field, const ScalarField& f, const ScalarField& g,
                   int n, double T, double cfl = 0.5, std::int64_t snapshot_stride = 0,
                   double dt_target = 0.0);

// Leapfrog evolution of the homogenized equation.
Trajectory run_homogenized(const HomogenizedReference& reference, int dim,
                           const ScalarField& f, const ScalarField& g, int n, double T,
                           double cfl = 0.5, std::int64_t snapshot_stride = 0,
                           double dt_target = 0.0);

// Long-time effective equation u_tt = Abar u_xx + beta eps^2 u_xxxx (1D):
// second-order term in flux-difference form, biharmonic term with the 5-point
// stencil. With beta = 0 the update is bit-identical to run_homogenized.
//
// The continuous equation amplifies modes with k > sqrt(Abar/beta)/eps, so
// the grid must act as the regularizing cutoff: stability requires
// beta <= Abar h^2 / (2 eps)^2 on top of the time-step rule
// dT <= cfl * min(h/sqrt(Abar), h^2/(2 eps sqrt(beta))).
struct DispersiveConfig {
    double abar = 0.0;
    double beta = 0.0;
    double eps = 0.0;
    int n = 0;
    double T = 0.0;
    double cfl = 0.5;
    std::int64_t snapshot_stride = 0;
};

Trajectory run_dispersive(const DispersiveConfig& config, const std::function<double(double)>& f);

// Least-squares fit of the dispersion coefficient: golden-section search on
// [0, beta_max] minimizing the terminal-time L2 mismatch between
// run_dispersive and a DNS snapshot restricted to the fit grid. beta_max = 0
// selects the largest grid-stable value, 0.9 * abar * h^2 / (2 eps)^2.
struct BetaFit {
    double beta = 0.0;
    double mismatch = 0.0;
    int evaluations = 0;
    double beta_max = 0.0;
};

BetaFit fit_beta(const std::vector<double>& dns_terminal, int dns_n, double T, double abar,
                 double eps, const std::function<double(double)>& f, int fit_n = 32,
                 double beta_max = 0.0);

}  // namespace hmmwave

#endif
