// Command-line front end: experiment runners, kernel verification, and
// one-off flux queries. See README.md for the configuration keys.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hmmwave/experiments.hpp"
#include "hmmwave/io.hpp"

namespace {

using namespace hmmwave;

struct CommonOptions {
    std::string profile = "desk";
    std::string config_file;
    std::vector<std::string> overrides;
    std::string out_dir = "out";
    bool emit_plot_data = false;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--profile", opt.profile, "Parameter profile: desk or paper")
        ->check(CLI::IsMember({"desk", "paper"}));
    cmd->add_option("--config", opt.config_file, "Key-value config file overlaid on defaults");
    cmd->add_option("--set", opt.overrides, "Override a single key, e.g. --set macro.n=50");
    cmd->add_option("--out", opt.out_dir, "Output directory root");
    cmd->add_flag("--emit-plot-data", opt.emit_plot_data, "Write per-figure CSV data");
}

KeyValueConfig assemble_config(const std::string& experiment, const CommonOptions& opt) {
    KeyValueConfig cfg = example_defaults(experiment, parse_profile(opt.profile));
    if (!opt.config_file.empty()) {
        KeyValueConfig file_cfg = KeyValueConfig::from_file(opt.config_file);
        for (const auto& [k, v] : file_cfg.entries()) cfg.set(k, v);
    }
    for (const std::string& kv : opt.overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw Error("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.set("output.dir", opt.out_dir);
    if (opt.emit_plot_data) cfg.set("output.emit_plot_data", "true");
    return cfg;
}

int run_experiment(const std::string& experiment, const CommonOptions& opt) {
    ResolvedExperiment exp = resolve_experiment(assemble_config(experiment, opt));
    RunResult result;
    if (exp.id == "kernel_study")
        result = run_kernel_convergence(exp);
    else if (exp.id == "longtime")
        result = run_longtime(exp);
    else
        result = run_example(exp);
    write_outputs(exp, result);
    std::printf("%s (%s profile): %zu metrics, %lld micro solves, %.2f s\n", exp.id.c_str(),
                profile_name(exp.profile).c_str(), result.metrics.size(),
                static_cast<long long>(result.micro_solves), result.wall_seconds);
    for (const auto& [k, v] : result.metrics)
        std::printf("  %-28s %s\n", k.c_str(), format_double(v).c_str());
    std::printf("outputs written under %s/%s\n", exp.out_dir.c_str(), exp.id.c_str());
    return 0;
}

int verify_kernels(const std::vector<std::string>& names) {
    std::vector<std::string> list = names;
    if (list.empty()) list = {"poly(1,1)", "poly(1,9)", "poly(5,6)", "poly(9,9)", "exp"};
    bool ok = true;
    std::printf("%-10s %4s %4s  %-12s %-12s %s\n", "kernel", "p", "q", "mass-1", "max|m_r|",
                "status");
    for (const std::string& name : list) {
        Kernel k = Kernel::parse(name);
        double mass_err = std::fabs(k.moment(0) - 1.0);
        double worst = 0.0;
        for (int r = 1; r <= k.moment_order(); ++r)
            worst = std::max(worst, std::fabs(k.moment(r)));
        bool pass = mass_err <= 1e-12 && worst <= 1e-10;
        ok = ok && pass;
        std::printf("%-10s %4d %4d  %-12.3e %-12.3e %s\n", k.name().c_str(), k.moment_order(),
                    k.smoothness(), mass_err, worst, pass ? "ok" : "FAIL");
    }
    return ok ? 0 : 1;
}

int flux_query(const std::string& experiment, const CommonOptions& opt,
               const std::vector<double>& point, const std::vector<double>& p) {
    ResolvedExperiment exp = resolve_experiment(assemble_config(experiment, opt));
    Point x{}, grad{};
    for (std::size_t i = 0; i < point.size() && i < 3; ++i) x[i] = point[i];
    for (std::size_t i = 0; i < p.size() && i < 3; ++i) grad[i] = p[i];
    MicroProblemSpec spec = assemble(x, grad, exp.micro, exp.field);
    Point F = solve_and_average(spec, exp.field);
    std::printf("F(");
    for (int d = 0; d < exp.dim; ++d) std::printf("%s%.6g", d ? ", " : "", x[d]);
    std::printf("; p = ");
    for (int d = 0; d < exp.dim; ++d) std::printf("%s%.6g", d ? ", " : "", grad[d]);
    std::printf(") =");
    for (int d = 0; d < exp.dim; ++d) std::printf(" %.15g", F[d]);
    std::printf("\n");
    HomogenizedReference ref = exp.field.homogenized();
    if (ref.available()) {
        Matrix3 ab = ref.eval(x);
        Point exact = ab.apply(grad, exp.dim);
        std::printf("homogenized reference:");
        for (int d = 0; d < exp.dim; ++d) std::printf(" %.15g", exact[d]);
        double err = 0.0;
        for (int d = 0; d < exp.dim; ++d) err = std::max(err, std::fabs(F[d] - exact[d]));
        std::printf("   (max deviation %.3e)\n", err);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heterogeneous multiscale solver for wave equations with rapidly "
                 "oscillating coefficients"};
    app.require_subcommand(1);

    CommonOptions run_opt;
    std::string run_id;
    CLI::App* run = app.add_subcommand("run", "Run an experiment end to end");
    run->add_option("experiment", run_id, "Experiment id (example1..example6, kernel_study, longtime)")
        ->required();
    add_common(run, run_opt);

    CLI::App* kernels = app.add_subcommand("kernels", "Kernel utilities");
    bool verify = false;
    std::vector<std::string> kernel_names;
    kernels->add_flag("--verify", verify, "Check unit mass and vanishing moments");
    kernels->add_option("--kernels", kernel_names, "Kernels to check, e.g. poly(5,6) exp");

    CommonOptions flux_opt;
    std::string flux_exp = "example1";
    std::vector<double> flux_point{0.0};
    std::vector<double> flux_p{1.0};
    CLI::App* flux = app.add_subcommand("flux", "Upscaled flux at one point");
    flux->add_option("--experiment", flux_exp, "Experiment whose field and micro setup to use");
    flux->add_option("--point", flux_point, "Evaluation point components");
    flux->add_option("--p", flux_p, "Gradient components");
    add_common(flux, flux_opt);

    CommonOptions conv_opt;
    std::string conv_variant = "fast";
    CLI::App* conv = app.add_subcommand("convergence", "Kernel convergence study");
    conv->add_option("--variant", conv_variant, "fast (pure fast scale) or fast_slow")
        ->check(CLI::IsMember({"fast", "fast_slow"}));
    add_common(conv, conv_opt);

    CommonOptions long_opt;
    CLI::App* longcmd = app.add_subcommand("longtime", "Long-time dispersive run");
    add_common(longcmd, long_opt);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_experiment(run_id, run_opt);
        if (kernels->parsed()) {
            if (!verify) {
                std::fprintf(stderr, "kernels: nothing to do (use --verify)\n");
                return 1;
            }
            return verify_kernels(kernel_names);
        }
        if (flux->parsed()) return flux_query(flux_exp, flux_opt, flux_point, flux_p);
        if (conv->parsed()) {
            conv_opt.overrides.push_back("study.variant=" + conv_variant);
            if (conv_variant == "fast_slow")
                conv_opt.overrides.push_back("study.ratio_max=30");
            return run_experiment("kernel_study", conv_opt);
        }
        if (longcmd->parsed()) return run_experiment("longtime", long_opt);
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
    return 1;
}
