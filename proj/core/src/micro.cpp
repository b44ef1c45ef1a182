#include "hmmwave/micro.hpp"

#include <algorithm>
#include <cmath>

#include "hmmwave/fd_core.hpp"

namespace hmmwave {

namespace {

constexpr double kCflGuard = 0.9;

struct Region {
    std::array<int, 3> lo{};
    std::array<int, 3> hi{};
    std::array<int, 3> width{1, 1, 1};
    std::int64_t volume = 1;
};

Region make_region(int dim, const std::array<int, 3>& lo, const std::array<int, 3>& hi) {
    Region r;
    r.lo = lo;
    r.hi = hi;
    for (int a = 0; a < dim; ++a) {
        r.width[a] = hi[a] - lo[a] + 1;
        r.volume *= r.width[a];
    }
    return r;
}

// Kernel-weighted reduction of (tw * static_flux + accumulated dynamic flux)
// over the region, one weight array per axis. Fixed summation order.
Point reduce_region(int dim, const Region& region,
                    const std::array<std::vector<double>, 3>& axis_weights,
                    const std::array<std::vector<double>, 3>& static_flux, double tw,
                    const std::array<std::vector<double>, 3>& acc) {
    Point f{};
    for (int c = 0; c < ((dim == 3) ? region.width[2] : 1); ++c) {
        double wc = (dim == 3) ? axis_weights[2][c] : 1.0;
        for (int b = 0; b < ((dim >= 2) ? region.width[1] : 1); ++b) {
            double wb = (dim >= 2) ? wc * axis_weights[1][b] : 1.0;
            std::int64_t base = static_cast<std::int64_t>(region.width[0]) *
                                (b + static_cast<std::int64_t>(region.width[1]) * c);
            for (int a = 0; a < region.width[0]; ++a) {
                double w = wb * axis_weights[0][a];
                std::int64_t idx = base + a;
                for (int ax = 0; ax < dim; ++ax)
                    f[ax] += w * (tw * static_flux[ax][idx] + acc[ax][idx]);
            }
        }
    }
    return f;
}

// Shared evolution loop: accumulates time-kernel-weighted center fluxes of
// the deviation over [0, tau], with doubled interior weights folding the even
// solution onto t >= 0. The initial-data part of the flux is time-independent
// and enters once through static_flux scaled by the discrete kernel mass.
Point evolve_and_average(const MicroProblemSpec& spec, WaveStepper& stepper,
                         const Region& region,
                         const std::array<std::vector<double>, 3>& axis_weights,
                         const std::array<std::vector<double>, 3>& static_flux) {
    std::array<std::vector<double>, 3> acc;
    for (int ax = 0; ax < spec.dim; ++ax) acc[ax].assign(region.volume, 0.0);

    const double k = spec.k;
    const std::int64_t N = spec.steps;
    auto time_weight = [&](std::int64_t n) {
        double fold = (n == 0) ? 1.0 : 2.0;
        return fold * k * spec.time_kernel.scaled(spec.tau, n * k);
    };
    double tw = 0.0;
    for (std::int64_t n = 0; n < N; ++n) tw += time_weight(n);
    // Level N sits exactly at the kernel support edge where K_tau vanishes,
    // so the loop stops one step short.

    auto zero = [](const Point&) { return 0.0; };
    WaveState state = stepper.initial_state(zero, nullptr, k);

    stepper.accumulate_center_flux(state.u_prev, region.lo, region.hi, time_weight(0), acc);
    for (std::int64_t n = 1; n < N; ++n) {
        stepper.accumulate_center_flux(state.u_curr, region.lo, region.hi, time_weight(n), acc);
        stepper.step(state, k);
    }

    return reduce_region(spec.dim, region, axis_weights, static_flux, tw, acc);
}

// Pure-fast-scale linear path: the deviation is exactly eps-periodic, so the
// dynamics run on one eps-cell and the quadrature node at x = j*h folds onto
// cell j mod m.
Point solve_on_cell(const MicroProblemSpec& spec, const CoefficientField& field) {
    const double eps = field.epsilon();
    const int m = static_cast<int>(std::llround(eps / spec.h));

    PeriodicGrid grid;
    grid.dim = spec.dim;
    grid.n = m;
    grid.h = spec.h;
    grid.origin = spec.center;

    WaveStepper stepper(grid, {[&field](const Point& x) { return field.eval(x); }, true});
    stepper.set_source(stepper.linear_source(spec.gradient));

    std::array<int, 3> lo{0, 0, 0};
    std::array<int, 3> hi{};
    for (int ax = 0; ax < 3; ++ax) hi[ax] = (ax < spec.dim) ? m - 1 : 0;
    Region region = make_region(spec.dim, lo, hi);

    const int J = static_cast<int>(std::floor(spec.eta / spec.h + 1e-9));
    std::array<std::vector<double>, 3> axis_weights;
    for (int ax = 0; ax < spec.dim; ++ax) {
        axis_weights[ax].assign(m, 0.0);
        for (int j = -J; j <= J; ++j) {
            int cell = ((j % m) + m) % m;
            axis_weights[ax][cell] += spec.h * spec.space_kernel.scaled(spec.eta, j * spec.h);
        }
    }

    std::array<std::vector<double>, 3> static_flux;
    for (int ax = 0; ax < spec.dim; ++ax) static_flux[ax].assign(region.volume, 0.0);
    stepper.add_linear_center_flux(spec.gradient, region.lo, region.hi, 1.0, static_flux);

    return evolve_and_average(spec, stepper, region, axis_weights, static_flux);
}

// General path: full safety box with periodic deviation.
Point solve_on_box(const MicroProblemSpec& spec, const CoefficientField& field) {
    const int half_cells = static_cast<int>(std::llround(spec.y_max / spec.h));
    const int n = 2 * half_cells;

    PeriodicGrid grid;
    grid.dim = spec.dim;
    grid.n = n;
    grid.h = spec.h;
    for (int ax = 0; ax < spec.dim; ++ax) grid.origin[ax] = spec.center[ax] - spec.y_max;

    const int J = static_cast<int>(std::floor(spec.eta / spec.h + 1e-9));
    if (J >= half_cells)
        throw Error("micro: kernel support exceeds the micro box");

    WaveStepper stepper(grid, {[&field](const Point& x) { return field.eval(x); }, true});

    std::array<int, 3> lo{}, hi{};
    for (int ax = 0; ax < 3; ++ax) {
        lo[ax] = (ax < spec.dim) ? half_cells - J : 0;
        hi[ax] = (ax < spec.dim) ? half_cells + J : 0;
    }
    Region region = make_region(spec.dim, lo, hi);

    std::array<std::vector<double>, 3> axis_weights;
    for (int ax = 0; ax < spec.dim; ++ax) {
        axis_weights[ax].assign(region.width[ax], 0.0);
        for (int j = -J; j <= J; ++j)
            axis_weights[ax][j + J] = spec.h * spec.space_kernel.scaled(spec.eta, j * spec.h);
    }

    std::array<std::vector<double>, 3> static_flux;
    for (int ax = 0; ax < spec.dim; ++ax) static_flux[ax].assign(region.volume, 0.0);

    if (spec.form == MicroInitialForm::Linear) {
        stepper.set_source(stepper.linear_source(spec.gradient));
        stepper.add_linear_center_flux(spec.gradient, region.lo, region.hi, 1.0, static_flux);
    } else {
        // Cubic data (1D): source and static flux from the unwrapped
        // polynomial, so the face between the last and first cell sees the
        // local polynomial increment, not the wrap-around jump.
        auto poly = cubic_initial_data(spec.gradient[0], spec.cubic.second, spec.cubic.third);
        const auto& a_face = stepper.face_coefficient(0);
        std::vector<double> face_flux(n);  // a_{i+1/2} * (poly(x_{i+1}) - poly(x_i)) / h
        const double inv_h = 1.0 / spec.h;
        for (int i = 0; i < n; ++i) {
            double x = -spec.y_max + i * spec.h;
            face_flux[i] = a_face[i] * (poly(x + spec.h) - poly(x)) * inv_h;
        }
        std::vector<double> source(n);
        for (int i = 0; i < n; ++i) {
            int im = (i + n - 1) % n;
            source[i] = (face_flux[i] - face_flux[im]) * inv_h;
        }
        stepper.set_source(std::move(source));
        for (int i = lo[0]; i <= hi[0]; ++i)
            static_flux[0][i - lo[0]] = 0.5 * (face_flux[i] + face_flux[i - 1]);
    }

    return evolve_and_average(spec, stepper, region, axis_weights, static_flux);
}

void validate_spec(const MicroProblemSpec& spec) {
    if (spec.dim < 1 || spec.dim > 3) throw Error("micro: dimension must be 1, 2 or 3");
    if (!(spec.eta > 0.0) || !(spec.tau > 0.0)) throw Error("micro: eta and tau must be positive");
    if (!(spec.eta < spec.y_max)) throw Error("micro: averaging region must sit strictly inside the box");
    if (spec.steps < 2) throw Error("micro: too few time steps");
    for (int ax = 0; ax < spec.dim; ++ax)
        if (!std::isfinite(spec.gradient[ax])) throw Error("micro: gradient must be finite");
}

}  // namespace

double size_micro_box(double eta, double tau, double coeff_bound) {
    if (!(eta > 0.0)) throw Error("micro: eta must be positive");
    if (tau < 0.0) throw Error("micro: tau must be non-negative");
    if (tau > 0.0 && !(coeff_bound > 0.0))
        throw Error("micro: coefficient bound must be positive");
    return eta + tau * std::sqrt(coeff_bound);
}

MicroProblemSpec assemble(const Point& x0, const Point& p, const MicroParams& params,
                          const CoefficientField& field) {
    if (!(params.eta > 0.0) || !(params.tau > 0.0))
        throw Error("micro: eta and tau must be positive");
    const int d = field.dimension();
    const double eps = field.epsilon();
    const double h = eps / params.h_per_eps;

    if (params.eta / h < params.min_quadrature_points - 1e-9)
        throw Error("micro: eta/h below " + std::to_string(params.min_quadrature_points) +
                    " quadrature points; kernel under-resolved");

    const double bound = field.sup_norm_bound();
    PeriodicGrid probe;
    probe.dim = d;
    probe.n = 4;
    probe.h = h;
    const double k_cap = kCflGuard * cfl_max_dt(probe, bound);
    const double k_target = std::min(params.k_over_h * h, k_cap);
    const auto steps = static_cast<std::int64_t>(std::ceil(params.tau / k_target - 1e-12));
    if (steps < params.min_quadrature_points)
        throw Error("micro: tau/k below the quadrature-point floor");

    const double y_raw = size_micro_box(params.eta, params.tau, bound);
    const auto half_cells = static_cast<int>(std::ceil(y_raw / h - 1e-9));

    MicroProblemSpec spec;
    spec.dim = d;
    spec.center = x0;
    spec.gradient = p;
    spec.eta = params.eta;
    spec.tau = params.tau;
    spec.y_max = half_cells * h;
    spec.h = h;
    spec.k = params.tau / static_cast<double>(steps);
    spec.steps = steps;
    spec.space_kernel = params.space_kernel;
    spec.time_kernel = params.time_kernel;
    spec.coeff_bound = bound;
    validate_spec(spec);
    return spec;
}

MicroProblemSpec assemble_cubic(double x0, double p, const CubicData& cubic,
                                const MicroParams& params, const CoefficientField& field) {
    if (field.dimension() != 1)
        throw Error("micro: cubic initial data is one-dimensional only");
    MicroProblemSpec spec = assemble({x0, 0, 0}, {p, 0, 0}, params, field);
    spec.form = MicroInitialForm::Cubic;
    spec.cubic = cubic;
    return spec;
}

std::function<double(double)> cubic_initial_data(double p, double second, double third) {
    return [p, second, third](double x) {
        return x * (p + x * (0.5 * second + x * third / 6.0));
    };
}

Point solve_and_average(const MicroProblemSpec& spec, const CoefficientField& field) {
    validate_spec(spec);
    if (field.dimension() != spec.dim)
        throw Error("micro: field dimension does not match the problem");

    bool cell_exact = field.fast_scale_periodic() && spec.form == MicroInitialForm::Linear;
    if (cell_exact) {
        const double eps = field.epsilon();
        const double cells = eps / spec.h;
        cell_exact = std::fabs(cells - std::round(cells)) < 1e-9 * cells &&
                     std::llround(cells) >= 4;
    }
    return cell_exact ? solve_on_cell(spec, field) : solve_on_box(spec, field);
}

}  // namespace hmmwave
