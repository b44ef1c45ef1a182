#include "hmmwave/experiments.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>

#if __has_include(<nlohmann/json.hpp>)
#include <nlohmann/json.hpp>
#else
#include "json.hpp"
#endif

#include "hmmwave/io.hpp"
#include "hmmwave/parallel.hpp"

namespace hmmwave {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string sanitize(const std::string& name) {
    std::string out;
    for (char c : name) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            out += c;
        else if (c == ',' || c == '(')
            out += '_';
    }
    return out;
}

CoefficientField build_field(const KeyValueConfig& c) {
    const std::string form = c.get_string("field.form", "periodic1d");
    const double eps = c.get_double("field.eps", 0.01);
    const double offset = c.get_double("field.offset", 1.1);
    const double amp = c.get_double("field.amp", 1.0);
    const bool fast_sin = c.get_string("field.fast_trig", "sin") == "sin";
    const double slow_amp = c.get_double("field.slow_amp", 0.0);
    const bool slow_sin = c.get_string("field.slow_trig", "sin") == "sin";

    auto fast_terms = [&]() {
        std::vector<TrigTerm> t;
        if (amp != 0.0) t.push_back({amp, 1, fast_sin});
        return t;
    };
    auto generator_1d = [&]() {
        if (slow_amp != 0.0)
            return CoefficientField::locally_periodic1d(offset, {slow_amp, 1, slow_sin},
                                                        {amp, 1, fast_sin}, eps);
        return CoefficientField::periodic1d(offset, fast_terms(), eps);
    };

    if (form == "periodic1d") return CoefficientField::periodic1d(offset, fast_terms(), eps);
    if (form == "locally_periodic1d")
        return CoefficientField::locally_periodic1d(offset, {slow_amp, 1, slow_sin},
                                                    {amp, 1, fast_sin}, eps);
    if (form == "multifrequency1d") {
        auto amps = c.get_double_list("field.amp_list");
        auto epss = c.get_double_list("field.eps_list");
        if (amps.size() != epss.size() || amps.empty())
            throw Error("config: field.amp_list and field.eps_list must be non-empty and equal length");
        std::vector<std::pair<double, double>> terms;
        for (std::size_t i = 0; i < amps.size(); ++i) terms.emplace_back(amps[i], epss[i]);
        return CoefficientField::multi_frequency1d(offset, terms);
    }
    if (form == "diagonal2d") return CoefficientField::diagonal_nd(2, generator_1d());
    if (form == "diagonal3d") return CoefficientField::diagonal_nd(3, generator_1d());
    if (form == "tabulated1d") {
        auto samples = c.get_double_list("field.samples");
        double spacing = c.get_double("field.spacing", 0.0);
        return CoefficientField::tabulated1d(samples, spacing);
    }
    throw Error("config: unknown field.form '" + form + "'");
}

// Shared macro/hom time-step target so HMM-vs-HOM differences measure flux
// error, not time-discretization mismatch.
double macro_dt_target(const ResolvedExperiment& exp) {
    PeriodicGrid g;
    g.dim = exp.dim;
    g.n = exp.macro_n;
    g.h = 1.0 / exp.macro_n;
    if (exp.macro_dt_over_h > 0.0) return exp.macro_dt_over_h * g.h;
    return exp.macro_cfl * cfl_max_dt(g, exp.field.sup_norm_bound());
}

void push_comparison(RunResult& res, const std::string& name, const std::vector<double>& a,
                     const std::vector<double>& b, int dim, double h) {
    res.metrics["linf_" + name] = grid_error(a, b, ErrorNorm::LInf, dim, h);
    res.metrics["l2_" + name] = grid_error(a, b, ErrorNorm::L2, dim, h);
}

}  // namespace

const std::vector<std::string> kExperimentIds = {
    "example1", "example2", "example3", "example4",
    "example5", "example6", "kernel_study", "longtime",
};

Profile parse_profile(const std::string& name) {
    if (name == "desk") return Profile::Desk;
    if (name == "paper") return Profile::Paper;
    throw Error("unknown profile '" + name + "' (expected desk or paper)");
}

std::string profile_name(Profile p) { return p == Profile::Desk ? "desk" : "paper"; }

KeyValueConfig example_defaults(const std::string& id, Profile profile) {
    const bool desk = profile == Profile::Desk;
    KeyValueConfig c;
    c.set("experiment", id);
    c.set("profile", profile_name(profile));
    c.set("macro.cfl", "0.5");
    c.set("macro.T", "1.0");
    c.set("micro.h_per_eps", "64");
    c.set("micro.k_over_h", "0.5");
    c.set("micro.eta_over_eps", "10");
    c.set("micro.tau_over_eps", "10");
    c.set("kernel.space", "poly(5,6)");
    c.set("kernel.time", "poly(5,6)");
    c.set("solvers.hmm", "true");
    c.set("solvers.hom", "true");
    c.set("solvers.dns", desk ? "true" : "false");
    c.set("cache.dedup", "auto");
    c.set("pulse.center", "0.5");
    c.set("pulse.sigma", "0.1");
    c.set("run.seed", "20240901");

    if (id == "example1") {
        c.set("field.form", "periodic1d");
        c.set("field.eps", desk ? "0.05" : "0.01");
        c.set("macro.n", desk ? "20" : "100");
        c.set("solvers.dns", "true");
        c.set("dns.n", desk ? "1280" : "6400");
    } else if (id == "example2") {
        c.set("field.form", "locally_periodic1d");
        c.set("field.amp", "0.5");
        c.set("field.slow_amp", "0.5");
        c.set("field.slow_trig", "cos");
        c.set("field.eps", desk ? "0.05" : "0.01");
        c.set("macro.n", desk ? "60" : "300");
        c.set("kernel.space", "poly(9,9)");
        c.set("kernel.time", "poly(9,9)");
        if (desk) {
            // The (9,9) kernel needs eta/eps >= 4 before its transform decay
            // sets in; below that the averaging window passes the fast scale
            // almost untouched.
            c.set("micro.eta_over_eps", "4");
            c.set("micro.tau_over_eps", "4");
        }
        c.set("solvers.dns", "true");
        c.set("dns.n", desk ? "1280" : "6400");
    } else if (id == "example3") {
        c.set("field.form", "multifrequency1d");
        c.set("field.amp_list", "0.2,0.2,0.2,0.2,0.2");
        if (desk) {
            // 1/18 .. 1/22: the same five-tone structure at desk scale.
            c.set("field.eps_list",
                  "0.055555555555555552,0.052631578947368418,0.05,"
                  "0.047619047619047616,0.045454545454545456");
        } else {
            // 1/90, 1/95, 1/100, 1/105, 1/110.
            c.set("field.eps_list",
                  "0.011111111111111112,0.010526315789473684,0.01,"
                  "0.0095238095238095247,0.0090909090909090905");
        }
        c.set("macro.n", desk ? "60" : "300");
        c.set("micro.eta_over_eps", "1");
        c.set("micro.tau_over_eps", "10");
        c.set("solvers.hom", "false");
        c.set("solvers.dns", "true");
        c.set("dns.n", desk ? "1440" : "7040");
    } else if (id == "example4") {
        c.set("field.form", "diagonal2d");
        c.set("field.eps", desk ? "0.05" : "0.01");
        c.set("macro.n", desk ? "20" : "300");
        c.set("kernel.space", "exp");
        c.set("kernel.time", "exp");
        c.set("solvers.dns", desk ? "true" : "false");
        c.set("dns.n", desk ? "1280" : "6400");
    } else if (id == "example5") {
        c.set("field.form", "diagonal2d");
        c.set("field.amp", "0.5");
        c.set("field.slow_amp", "0.5");
        c.set("field.eps", desk ? "0.05" : "0.01");
        c.set("macro.n", desk ? "20" : "300");
        c.set("kernel.space", desk ? "poly(5,6)" : "exp");
        c.set("kernel.time", desk ? "poly(5,6)" : "exp");
        c.set("micro.eta_over_eps", "3");
        c.set("micro.tau_over_eps", "3");
        if (desk) c.set("micro.h_per_eps", "32");
        c.set("solvers.dns", desk ? "true" : "false");
        c.set("dns.n", desk ? "1280" : "6400");
    } else if (id == "example6") {
        c.set("field.form", "diagonal3d");
        c.set("field.eps", desk ? "0.02" : "0.01");
        c.set("macro.n", "20");
        c.set("macro.T", "0.25");
        c.set("macro.dt_over_h", "0.25");
        c.set("micro.eta_over_eps", "1");
        c.set("micro.tau_over_eps", "5");
        c.set("micro.h_per_eps", desk ? "32" : "64");
        c.set("micro.k_over_h", "0.3");
        if (desk) {
            // At H = 2.5 eps the face phases sit at the sine's extrema, so
            // the averaging window of width eta = eps keeps the whole first
            // harmonic unless the spatial kernel is wide; poly(1,1) is the
            // only kernel in the family with small mass at one period. The
            // paper grid (H = 5 eps) lands on odd-symmetry phases instead,
            // where the (9,9) kernel is fine.
            c.set("kernel.space", "poly(1,1)");
            c.set("kernel.time", "poly(1,9)");
        } else {
            c.set("kernel.space", "poly(9,9)");
            c.set("kernel.time", "poly(9,9)");
        }
        c.set("solvers.dns", "false");
    } else if (id == "kernel_study") {
        c.set("field.form", "periodic1d");
        c.set("field.eps", "0.01");
        c.set("study.variant", "fast");
        c.set("study.ratio_min", "2");
        c.set("study.ratio_max", "10");
        c.set("solvers.dns", "false");
    } else if (id == "longtime") {
        c.set("field.form", "periodic1d");
        c.set("field.eps", "0.05");
        c.set("macro.n", "32");
        c.set("macro.T", "400");
        // p >= 2 keeps the kernel's second moment from polluting the cubic
        // response with spurious dispersion; eta = tau = 5 eps puts the
        // (5,6) kernel's averaging error two orders below eps^2.
        c.set("kernel.space", "poly(5,6)");
        c.set("kernel.time", "poly(5,6)");
        c.set("longtime.eta_over_eps", "5");
        c.set("longtime.fit_n", "32");
        c.set("dns.n", "1280");
        c.set("longtime.dns_n_alt", "2560");
        c.set("solvers.dns", "true");
    } else {
        throw Error("unknown experiment id '" + id + "'");
    }
    return c;
}

ResolvedExperiment resolve_experiment(const KeyValueConfig& config) {
    ResolvedExperiment exp;
    exp.config = config;
    exp.id = config.get_string("experiment", "custom");
    exp.profile = parse_profile(config.get_string("profile", "desk"));
    exp.field = build_field(config);
    exp.dim = exp.field.dimension();

    exp.macro_n = config.get_int("macro.n", 32);
    exp.macro_cfl = config.get_double("macro.cfl", 0.5);
    exp.macro_dt_over_h = config.get_double("macro.dt_over_h", 0.0);
    exp.T = config.get_double("macro.T", 1.0);
    if (exp.macro_n < 4) throw Error("config: macro.n must be at least 4");
    if (exp.T < 0.0) throw Error("config: macro.T must be non-negative");

    const double eps = exp.field.epsilon();
    exp.micro.eta = config.get_double("micro.eta_over_eps", 10.0) * eps;
    exp.micro.tau = config.get_double("micro.tau_over_eps", 10.0) * eps;
    exp.micro.h_per_eps = config.get_int("micro.h_per_eps", 64);
    exp.micro.k_over_h = config.get_double("micro.k_over_h", 0.5);
    exp.micro.min_quadrature_points = config.get_int("micro.min_points", 8);
    exp.micro.space_kernel = Kernel::parse(config.get_string("kernel.space", "poly(5,6)"));
    exp.micro.time_kernel = Kernel::parse(config.get_string("kernel.time", "poly(5,6)"));

    exp.solve_hmm = config.get_bool("solvers.hmm", true);
    exp.solve_hom = config.get_bool("solvers.hom", true);
    exp.solve_dns = config.get_bool("solvers.dns", false);
    exp.dns_n = config.get_int("dns.n", 0);
    exp.dns_cfl = config.get_double("dns.cfl", 0.5);
    if (exp.solve_dns && exp.dns_n <= 0) throw Error("config: solvers.dns needs dns.n");

    exp.dedup = config.get_string("cache.dedup", "auto");
    if (exp.dedup != "auto" && exp.dedup != "on" && exp.dedup != "off")
        throw Error("config: cache.dedup must be auto, on or off");
    exp.snapshot_stride = config.get_int64("run.snapshot_stride", 0);
    exp.seed = static_cast<std::uint64_t>(config.get_int64("run.seed", 20240901));
    set_worker_count(config.get_int("run.workers", 0));

    exp.pulse_center = config.get_double("pulse.center", 0.5);
    exp.pulse_sigma = config.get_double("pulse.sigma", 0.1);

    exp.study_variant = config.get_string("study.variant", "fast");
    exp.study_ratio_min = config.get_int("study.ratio_min", 2);
    exp.study_ratio_max = config.get_int("study.ratio_max", 10);

    exp.longtime_eta_over_eps = config.get_double("longtime.eta_over_eps", 2.5);
    exp.fit_n = config.get_int("longtime.fit_n", 32);
    exp.beta_max = config.get_double("longtime.beta_max", 0.0);
    exp.dns_n_alt = config.get_int("longtime.dns_n_alt", 0);

    exp.out_dir = config.get_string("output.dir", "out");
    exp.emit_plot_data = config.get_bool("output.emit_plot_data", false);
    return exp;
}

ScalarField gaussian_pulse(const ResolvedExperiment& exp) {
    const double c = exp.pulse_center;
    const double s2 = exp.pulse_sigma * exp.pulse_sigma;
    const int dim = exp.dim;
    return [c, s2, dim](const Point& x) {
        double r2 = 0.0;
        for (int d = 0; d < dim; ++d) r2 += (x[d] - c) * (x[d] - c);
        return std::exp(-r2 / s2);
    };
}

std::vector<Point> macro_face_points(int dim, int n) {
    PeriodicGrid g;
    g.dim = dim;
    g.n = n;
    g.h = 1.0 / n;
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(dim) * g.cell_count());
    for (int a = 0; a < dim; ++a)
        for (int k = 0; k < ((dim == 3) ? n : 1); ++k)
            for (int j = 0; j < ((dim >= 2) ? n : 1); ++j)
                for (int i = 0; i < n; ++i) {
                    Point x = g.node(i, j, k);
                    x[a] += 0.5 * g.h;
                    pts.push_back(x);
                }
    return pts;
}

RunResult run_example(const ResolvedExperiment& exp) {
    if (exp.id == "example6" && exp.solve_dns)
        throw Error("example6: DNS of the 3D oscillatory problem is refused: resolving "
                    "eps/32 in three dimensions is far beyond desk scale");

    auto t0 = Clock::now();
    RunResult res;
    res.id = exp.id;

    ScalarField f = gaussian_pulse(exp);
    ScalarField g;  // zero initial velocity in every example

    const double H = 1.0 / exp.macro_n;
    const double dt_target = macro_dt_target(exp);
    const double bound = exp.field.sup_norm_bound();

    Trajectory hmm, hom, dns;
    bool have_hmm = false, have_hom = false, have_dns = false;

    if (exp.solve_hmm) {
        bool dedup = exp.dedup == "on" ||
                     (exp.dedup == "auto" && should_dedup(exp.field, H));
        FluxTable table =
            precompute(macro_face_points(exp.dim, exp.macro_n), exp.micro, exp.field, dedup);
        res.micro_solves = table.solve_count();
        res.metrics["micro_solve_count"] = static_cast<double>(table.solve_count());
        res.metrics["flux_table_entries"] = static_cast<double>(table.entry_count());
        res.metrics["dedup"] = dedup ? 1.0 : 0.0;

        CachedFluxProvider provider(table);
        MacroRunConfig mc;
        mc.dim = exp.dim;
        mc.n = exp.macro_n;
        mc.coeff_bound = bound;
        mc.cfl = exp.macro_cfl;
        mc.dt_target = dt_target;
        mc.T = exp.T;
        mc.f = f;
        mc.g = g;
        mc.snapshot_stride = exp.snapshot_stride;
        hmm = run_macro(mc, provider);
        have_hmm = true;
        res.metrics["macro_steps"] = static_cast<double>(hmm.steps);
        res.metrics["macro_dt"] = hmm.dt;
        res.trajectories.emplace_back("hmm", hmm);
    }

    HomogenizedReference ref = exp.field.homogenized();
    res.metrics["hom_available"] = ref.available() ? 1.0 : 0.0;
    if (exp.solve_hom && ref.available()) {
        hom = run_homogenized(ref, exp.dim, f, g, exp.macro_n, exp.T, exp.macro_cfl,
                              exp.snapshot_stride, dt_target);
        have_hom = true;
        res.trajectories.emplace_back("hom", hom);
    }

    if (exp.solve_dns) {
        dns = run_dns(exp.field, f, g, exp.dns_n, exp.T, exp.dns_cfl, exp.snapshot_stride);
        have_dns = true;
        res.metrics["dns_steps"] = static_cast<double>(dns.steps);
        res.trajectories.emplace_back("dns", dns);
    }

    if (have_hmm && have_hom)
        push_comparison(res, "hmm_hom", hmm.final_snapshot().u, hom.final_snapshot().u,
                        exp.dim, H);
    if (have_dns) {
        std::vector<double> dns_coarse =
            restrict_to_grid(dns.final_snapshot().u, exp.dns_n, exp.macro_n, exp.dim);
        if (have_hmm)
            push_comparison(res, "hmm_dns", hmm.final_snapshot().u, dns_coarse, exp.dim, H);
        if (have_hom)
            push_comparison(res, "hom_dns", hom.final_snapshot().u, dns_coarse, exp.dim, H);
    }

    res.record_header = {"solver", "n", "dt", "steps"};
    auto add_solver_row = [&](const std::string& name, const Trajectory& t, int n) {
        res.records.push_back({name, std::to_string(n), format_double(t.dt),
                               std::to_string(t.steps)});
    };
    if (have_hmm) add_solver_row("hmm", hmm, exp.macro_n);
    if (have_hom) add_solver_row("hom", hom, exp.macro_n);
    if (have_dns) add_solver_row("dns", dns, exp.dns_n);

    res.wall_seconds = seconds_since(t0);
    return res;
}

double longtime_eta_rule(double eps, int q) {
    if (q < 3) throw Error("longtime: kernel smoothness q must be at least 3");
    return std::pow(eps, 1.0 - 2.0 / static_cast<double>(q));
}

double loglog_slope(const std::vector<double>& ratios, const std::vector<double>& errors) {
    if (ratios.size() != errors.size() || ratios.size() < 2)
        throw Error("loglog_slope: need at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto n = static_cast<double>(ratios.size());
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        double x = std::log(ratios[i]);
        double y = std::log(std::max(errors[i], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

RunResult run_kernel_convergence(const ResolvedExperiment& exp) {
    auto t0 = Clock::now();
    RunResult res;
    res.id = exp.id;

    CoefficientField field = exp.field;
    if (exp.study_variant == "fast_slow") {
        // Both fast and slow scales: offset + (sin(2 pi x) + sin(2 pi y))/2.
        field = CoefficientField::locally_periodic1d(1.1, {0.5, 1, true}, {0.5, 1, true},
                                                     exp.field.epsilon());
    } else if (exp.study_variant != "fast") {
        throw Error("kernel study: variant must be fast or fast_slow");
    }
    HomogenizedReference ref = field.homogenized();
    if (!ref.available()) throw Error("kernel study: field has no homogenized reference");
    const double abar0 = ref.eval({0.0, 0.0, 0.0})(0, 0);
    const double eps = field.epsilon();

    const std::vector<Kernel> kernels = {Kernel::polynomial(1, 1), Kernel::polynomial(1, 9),
                                         Kernel::exponential()};
    const int rmin = exp.study_ratio_min;
    const int rmax = exp.study_ratio_max;
    if (rmin < 1 || rmax <= rmin) throw Error("kernel study: bad ratio range");

    struct Task {
        std::size_t kernel;
        int ratio;
    };
    std::vector<Task> tasks;
    for (std::size_t ki = 0; ki < kernels.size(); ++ki)
        for (int r = rmin; r <= rmax; ++r) tasks.push_back({ki, r});

    std::vector<double> errors(tasks.size());
    std::vector<std::string> failures(tasks.size());
    parallel_for_blocks(static_cast<std::int64_t>(tasks.size()), [&](std::int64_t ti) {
        const Task& task = tasks[ti];
        try {
            MicroParams mp = exp.micro;
            mp.eta = task.ratio * eps;
            mp.tau = task.ratio * eps;
            mp.space_kernel = kernels[task.kernel];
            mp.time_kernel = kernels[task.kernel];
            MicroProblemSpec spec = assemble({0, 0, 0}, {1, 0, 0}, mp, field);
            Point F = solve_and_average(spec, field);
            errors[ti] = std::fabs(F[0] - abar0);
        } catch (const std::exception& ex) {
            failures[ti] = ex.what();
        }
    });
    for (std::size_t ti = 0; ti < tasks.size(); ++ti)
        if (!failures[ti].empty())
            throw Error("kernel study: ratio " + std::to_string(tasks[ti].ratio) +
                        " failed: " + failures[ti]);

    res.record_header = {"kernel", "eta_over_eps", "flux_error"};
    res.metrics["abar_reference"] = abar0;
    for (std::size_t ki = 0; ki < kernels.size(); ++ki) {
        std::vector<double> rs, es;
        for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
            if (tasks[ti].kernel != ki) continue;
            rs.push_back(tasks[ti].ratio);
            es.push_back(errors[ti]);
            res.records.push_back({kernels[ki].name(), std::to_string(tasks[ti].ratio),
                                   format_double(errors[ti])});
        }
        const std::string tag = sanitize(kernels[ki].name());
        res.metrics["slope_" + tag] = loglog_slope(rs, es);
        auto mi = std::min_element(es.begin(), es.end()) - es.begin();
        res.metrics["argmin_ratio_" + tag] = rs[mi];
        res.metrics["err_min_" + tag] = es[mi];
        res.metrics["err_first_" + tag] = es.front();
        res.metrics["err_last_" + tag] = es.back();
    }
    res.micro_solves = static_cast<std::int64_t>(tasks.size());
    res.wall_seconds = seconds_since(t0);
    return res;
}

namespace {

// Long-time HMM: cubic micro data makes the flux a linear map of
// (P, u_xx, u_xxx) at each face, so three basis solves per canonical face key
// feed the whole run. 1D.
struct CubicFluxTable {
    std::vector<double> bp, bh, bt;   // per key: flux response to p, u_xx, u_xxx
    std::vector<std::size_t> key_of_face;
    std::int64_t solves = 0;
};

CubicFluxTable build_cubic_table(const ResolvedExperiment& exp, const MicroParams& mp) {
    const int n = exp.macro_n;
    const double H = 1.0 / n;
    const double eps = exp.field.epsilon();
    const bool fold = exp.field.fast_scale_periodic();

    CubicFluxTable table;
    table.key_of_face.resize(n);
    std::vector<double> key_points;
    std::map<std::int64_t, std::size_t> seen;
    for (int m = 0; m < n; ++m) {
        double x = (m + 0.5) * H;
        if (fold) {
            x -= eps * std::floor(x / eps);
            if (x >= eps * (1.0 - 1e-9)) x = 0.0;
        }
        auto key = std::llround(x * 1e12);
        auto it = seen.find(key);
        if (it == seen.end()) {
            it = seen.emplace(key, key_points.size()).first;
            key_points.push_back(x);
        }
        table.key_of_face[m] = it->second;
    }

    const std::size_t nk = key_points.size();
    table.bp.assign(nk, 0.0);
    table.bh.assign(nk, 0.0);
    table.bt.assign(nk, 0.0);

    struct Task {
        std::size_t key;
        int basis;
    };
    std::vector<Task> tasks;
    for (std::size_t k = 0; k < nk; ++k)
        for (int b = 0; b < 3; ++b) tasks.push_back({k, b});
    std::vector<std::string> failures(tasks.size());
    parallel_for_blocks(static_cast<std::int64_t>(tasks.size()), [&](std::int64_t ti) {
        const Task& task = tasks[ti];
        try {
            double p = task.basis == 0 ? 1.0 : 0.0;
            CubicData cubic;
            cubic.second = task.basis == 1 ? 1.0 : 0.0;
            cubic.third = task.basis == 2 ? 1.0 : 0.0;
            MicroProblemSpec spec =
                assemble_cubic(key_points[task.key], p, cubic, mp, exp.field);
            double F = solve_and_average(spec, exp.field)[0];
            if (task.basis == 0)
                table.bp[task.key] = F;
            else if (task.basis == 1)
                table.bh[task.key] = F;
            else
                table.bt[task.key] = F;
        } catch (const std::exception& ex) {
            failures[ti] = ex.what();
        }
    });
    for (std::size_t ti = 0; ti < tasks.size(); ++ti)
        if (!failures[ti].empty()) throw Error("longtime: basis solve failed: " + failures[ti]);
    table.solves = static_cast<std::int64_t>(tasks.size());
    return table;
}

Trajectory run_longtime_hmm(const ResolvedExperiment& exp, const CubicFluxTable& table,
                            const ScalarField& f) {
    const int n = exp.macro_n;
    const double H = 1.0 / n;
    const double inv_H = 1.0 / H;
    const double bound = exp.field.sup_norm_bound();

    // Fourth-order flux response restricts the time step like an explicit
    // biharmonic term.
    double bt_max = 1e-30;
    for (double v : table.bt) bt_max = std::max(bt_max, std::fabs(v));
    PeriodicGrid grid;
    grid.dim = 1;
    grid.n = n;
    grid.h = H;
    double dt_target = exp.macro_cfl * cfl_max_dt(grid, bound);
    dt_target = std::min(dt_target, exp.macro_cfl * H * H / (2.0 * std::sqrt(bt_max)));
    const std::int64_t steps = snap_steps(exp.T, dt_target);
    const double dt = exp.T / static_cast<double>(steps);
    const double dt2 = dt * dt;

    std::vector<double> u0(n), u1(n), next(n), flux(n);
    for (int i = 0; i < n; ++i) u0[i] = f({i * H, 0, 0});

    const double inv_2H2 = 1.0 / (2.0 * H * H);
    const double inv_H3 = 1.0 / (H * H * H);
    auto fill_flux = [&](const std::vector<double>& u) {
        for (int m = 0; m < n; ++m) {
            const int m1 = (m + 1) % n;
            const int m2 = (m + 2) % n;
            const int mm = (m + n - 1) % n;
            const double p = (u[m1] - u[m]) * inv_H;
            const double uxx = (u[m2] - u[m1] - u[m] + u[mm]) * inv_2H2;
            const double uxxx = (u[m2] - 3.0 * u[m1] + 3.0 * u[m] - u[mm]) * inv_H3;
            const std::size_t key = table.key_of_face[m];
            flux[m] = p * table.bp[key] + uxx * table.bh[key] + uxxx * table.bt[key];
        }
    };

    Trajectory traj;
    traj.grid = grid;
    traj.dt = dt;
    traj.steps = steps;
    traj.snapshots.push_back({0.0, u0});

    fill_flux(u0);
    for (int i = 0; i < n; ++i) {
        const int im = (i + n - 1) % n;
        u1[i] = u0[i] + 0.5 * dt2 * (flux[i] - flux[im]) * inv_H;
    }

    std::int64_t step = 1;
    double t = dt;
    while (step < steps) {
        fill_flux(u1);
        double mx = 0.0;
        for (int i = 0; i < n; ++i) {
            const int im = (i + n - 1) % n;
            double nu = 2.0 * u1[i] - u0[i] + dt2 * (flux[i] - flux[im]) * inv_H;
            next[i] = nu;
            mx = std::max(mx, std::fabs(nu));
        }
        std::swap(u0, u1);
        std::swap(u1, next);
        t += dt;
        step += 1;
        if (!(mx < 1e12))
            throw Error("longtime: macro instability at step " + std::to_string(step));
        if (exp.snapshot_stride > 0 && step % exp.snapshot_stride == 0 && step != steps)
            traj.snapshots.push_back({t, u1});
    }
    traj.snapshots.push_back({exp.T, u1});
    return traj;
}

}  // namespace

RunResult run_longtime(const ResolvedExperiment& exp) {
    auto t0 = Clock::now();
    RunResult res;
    res.id = exp.id;

    if (exp.dim != 1) throw Error("longtime: one-dimensional media only");
    HomogenizedReference ref = exp.field.homogenized();
    if (!ref.available() || ref.form() != HomogenizedReference::Form::ConstantMatrix)
        throw Error("longtime: needs a constant homogenized reference");
    const double abar = ref.constant_matrix()(0, 0);
    const double eps = exp.field.epsilon();
    const double H = 1.0 / exp.macro_n;

    MicroParams mp = exp.micro;
    mp.eta = exp.longtime_eta_over_eps * eps;
    mp.tau = mp.eta;

    const int q = mp.space_kernel.smoothness();
    if (q != Kernel::kInfiniteSmoothness) {
        res.metrics["eta_rule"] = longtime_eta_rule(eps, q);
        if (std::pow(eps / mp.eta, q) > eps * eps)
            res.metrics["eta_below_rule"] = 1.0;
    }
    if (2.0 * mp.eta >= 1.0)
        throw Error("longtime: averaging width 2*eta covers the macro domain");
    res.metrics["eta_over_H_warning"] = (mp.eta >= 0.5 * H) ? 1.0 : 0.0;

    ScalarField f = gaussian_pulse(exp);
    auto f1 = [f](double x) { return f({x, 0, 0}); };

    // DNS at two resolutions; the dispersion fit must agree across them.
    Trajectory dns = run_dns(exp.field, f, nullptr, exp.dns_n, exp.T, exp.dns_cfl);
    res.trajectories.emplace_back("dns", dns);
    BetaFit fit = fit_beta(dns.final_snapshot().u, exp.dns_n, exp.T, abar, eps, f1, exp.fit_n,
                           exp.beta_max);
    res.metrics["beta"] = fit.beta;
    res.metrics["beta_mismatch"] = fit.mismatch;
    res.metrics["beta_max"] = fit.beta_max;
    res.metrics["beta_evaluations"] = fit.evaluations;
    if (exp.dns_n_alt > 0) {
        Trajectory dns2 = run_dns(exp.field, f, nullptr, exp.dns_n_alt, exp.T, exp.dns_cfl);
        BetaFit fit2 = fit_beta(dns2.final_snapshot().u, exp.dns_n_alt, exp.T, abar, eps, f1,
                                exp.fit_n, exp.beta_max);
        res.metrics["beta_alt"] = fit2.beta;
        res.metrics["beta_rel_diff"] =
            std::fabs(fit2.beta - fit.beta) / std::max(fit.beta, 1e-300);
    }

    // Non-dispersive comparator on the macro grid.
    Trajectory hom = run_homogenized(ref, 1, f, nullptr, exp.macro_n, exp.T, exp.macro_cfl,
                                     exp.snapshot_stride);
    res.trajectories.emplace_back("hom", hom);

    // HMM with cubic micro data.
    CubicFluxTable table = build_cubic_table(exp, mp);
    res.micro_solves = table.solves;
    res.metrics["micro_solve_count"] = static_cast<double>(table.solves);
    double bt_mean = 0.0, bp_mean = 0.0;
    for (double v : table.bt) bt_mean += v;
    for (double v : table.bp) bp_mean += v;
    bt_mean /= static_cast<double>(table.bt.size());
    bp_mean /= static_cast<double>(table.bp.size());
    res.metrics["flux_p_response"] = bp_mean;
    res.metrics["flux_uxxx_response"] = bt_mean;
    res.metrics["beta_from_flux"] = bt_mean / (eps * eps);

    Trajectory hmm = run_longtime_hmm(exp, table, f);
    res.trajectories.emplace_back("hmm", hmm);
    res.metrics["macro_steps"] = static_cast<double>(hmm.steps);
    res.metrics["macro_dt"] = hmm.dt;

    std::vector<double> dns_coarse =
        restrict_to_grid(dns.final_snapshot().u, exp.dns_n, exp.macro_n, 1);
    push_comparison(res, "hmm_dns", hmm.final_snapshot().u, dns_coarse, 1, H);
    push_comparison(res, "hom_dns", hom.final_snapshot().u, dns_coarse, 1, H);
    res.metrics["dispersion_improvement"] =
        res.metrics["l2_hom_dns"] / std::max(res.metrics["l2_hmm_dns"], 1e-300);

    res.record_header = {"quantity", "value"};
    for (const auto& [k, v] : res.metrics) res.records.push_back({k, format_double(v)});

    res.wall_seconds = seconds_since(t0);
    return res;
}

std::string write_outputs(const ResolvedExperiment& exp, const RunResult& result) {
    namespace nj = nlohmann;
    const std::string dir = exp.out_dir + "/" + exp.id;

    std::vector<std::string> written;
    char name[256];
    for (const auto& [label, traj] : result.trajectories) {
        for (const Snapshot& snap : traj.snapshots) {
            std::snprintf(name, sizeof(name), "%s/snapshots/%s_%s_t%.6g.csv", dir.c_str(),
                          exp.id.c_str(), label.c_str(), snap.time);
            write_file_atomic(name, snapshot_csv(traj, snap));
            written.push_back(name);
        }
    }

    if (!result.records.empty()) {
        write_file_atomic(dir + "/records.csv", csv_text(result.record_header, result.records));
        written.push_back(dir + "/records.csv");
    }

    if (exp.emit_plot_data) {
        if (exp.id == "kernel_study") {
            // One file per kernel: eta/eps against flux error.
            std::map<std::string, std::vector<std::vector<std::string>>> per_kernel;
            for (const auto& row : result.records)
                per_kernel[row[0]].push_back({row[1], row[2]});
            for (const auto& [kern, rows] : per_kernel) {
                std::string path = dir + "/fig_kernconv_" + exp.study_variant + "_" +
                                   sanitize(kern) + ".csv";
                write_file_atomic(path, csv_text({"eta_over_eps", "flux_error"}, rows));
                written.push_back(path);
            }
        } else {
            // Final-time profiles on the macro line (midline slice in 2D/3D).
            std::vector<std::string> header = {"x"};
            std::vector<const Trajectory*> trajs;
            for (const auto& [label, traj] : result.trajectories) {
                header.push_back("u_" + label);
                trajs.push_back(&traj);
            }
            if (!trajs.empty()) {
                const int n = exp.macro_n;
                std::vector<std::vector<std::string>> rows;
                for (int i = 0; i < n; ++i) {
                    std::vector<std::string> row = {format_double(i * 1.0 / n)};
                    for (const Trajectory* t : trajs) {
                        const auto& u = t->final_snapshot().u;
                        const int tn = t->grid.n;
                        const int ratio = tn / n;
                        std::int64_t idx;
                        if (t->grid.dim == 1)
                            idx = static_cast<std::int64_t>(i) * ratio;
                        else if (t->grid.dim == 2)
                            idx = t->grid.index(i * ratio, (tn / 2));
                        else
                            idx = t->grid.index(i * ratio, tn / 2, tn / 2);
                        row.push_back(format_double(u[idx]));
                    }
                    rows.push_back(std::move(row));
                }
                std::string path = dir + "/fig_" + exp.id + "_final.csv";
                write_file_atomic(path, csv_text(header, rows));
                written.push_back(path);
            }
        }
    }

    nj::ordered_json j;
    j["experiment"] = exp.id;
    j["profile"] = profile_name(exp.profile);
    char hash_hex[32];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(exp.config.hash()));
    j["config_hash"] = hash_hex;
    j["config"] = nj::ordered_json::object();
    for (const auto& [k, v] : exp.config.entries()) j["config"][k] = v;
    j["metrics"] = nj::ordered_json::object();
    for (const auto& [k, v] : result.metrics) j["metrics"][k] = v;
    j["micro_solve_count"] = result.micro_solves;
    j["wall_seconds"] = result.wall_seconds;
    j["outputs"] = written;

    std::string text = j.dump(2);
    text += "\n";
    write_file_atomic(dir + "/summary.json", text);
    return text;
}

}  // namespace hmmwave
