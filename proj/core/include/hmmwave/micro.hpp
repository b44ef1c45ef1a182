#ifndef HMMWAVE_MICRO_HPP
#define HMMWAVE_MICRO_HPP

#include <functional>

#include "hmmwave/coefficient.hpp"
#include "hmmwave/kernel.hpp"
#include "hmmwave/types.hpp"

namespace hmmwave {

// Numerical parameters for micro problems, usually relative to the field's
// micro scale eps.
struct MicroParams {
    double eta = 0.0;          // spatial averaging half-width
    double tau = 0.0;          // temporal averaging half-width
    int h_per_eps = 64;        // micro spacing h = eps / h_per_eps
    double k_over_h = 0.5;     // time step ratio, capped at 0.9 of the CFL bound
    Kernel space_kernel = Kernel::polynomial(1, 1);
    Kernel time_kernel = Kernel::polynomial(1, 1);
    int min_quadrature_points = 8;
};

enum class MicroInitialForm { Linear, Cubic };

// Second- and third-derivative data for the cubic (long-time) initial form;
// one-dimensional only.
struct CubicData {
    double second = 0.0;
    double third = 0.0;
};

struct MicroProblemSpec {
    int dim = 1;
    Point center{};
    Point gradient{};
    double eta = 0.0;
    double tau = 0.0;
    double y_max = 0.0;  // box half-width, an integer multiple of h
    double h = 0.0;
    double k = 0.0;      // adjusted so tau / k is an integer
    std::int64_t steps = 0;
    Kernel space_kernel = Kernel::polynomial(1, 1);
    Kernel time_kernel = Kernel::polynomial(1, 1);
    MicroInitialForm form = MicroInitialForm::Linear;
    CubicData cubic{};
    double coeff_bound = 0.0;
};

// Box half-width eta + tau * sqrt(coeff_bound), before grid rounding: large
// enough that boundary effects cannot reach the averaging region within tau.
double size_micro_box(double eta, double tau, double coeff_bound);

// Builds a validated micro problem around x0 with gradient p. The coefficient
// is evaluated as A(x + x0); periodicity is imposed on the deviation from the
// initial data, never on the solution itself.
MicroProblemSpec assemble(const Point& x0, const Point& p, const MicroParams& params,
                          const CoefficientField& field);

// Same with cubic initial data p x + second x^2/2 + third x^3/6 (1D only).
MicroProblemSpec assemble_cubic(double x0, double p, const CubicData& cubic,
                                const MicroParams& params, const CoefficientField& field);

// x -> p x + second x^2/2 + third x^3/6.
std::function<double(double)> cubic_initial_data(double p, double second, double third);

// Evolves the micro problem for t in [0, tau] and returns the space-time
// kernel average of A grad u. Exploits evenness in time (zero initial
// velocity) by integrating over [0, tau] with doubled interior weights.
//
// For pure-fast-scale fields with linear data the deviation is exactly
// eps-periodic, and the solve runs on a single eps-cell with the kernel
// weights folded mod eps; otherwise the full safety box is used.
Point solve_and_average(const MicroProblemSpec& spec, const CoefficientField& field);

}  // namespace hmmwave

#endif
