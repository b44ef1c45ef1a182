#ifndef HMMWAVE_EXPERIMENTS_HPP
#define HMMWAVE_EXPERIMENTS_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hmmwave/config.hpp"
#include "hmmwave/flux_cache.hpp"
#include "hmmwave/macro.hpp"
#include "hmmwave/reference.hpp"

namespace hmmwave {

enum class Profile { Desk, Paper };
Profile parse_profile(const std::string& name);
std::string profile_name(Profile p);

// Built-in experiment ids.
extern const std::vector<std::string> kExperimentIds;

// Default configuration for an experiment at a given profile. `desk` keeps
// every run in CI-minutes territory (larger eps, DNS enabled where
// affordable); `paper` uses the printed parameter sets.
KeyValueConfig example_defaults(const std::string& id, Profile profile);

// Everything a runner needs, resolved and validated from a configuration.
struct ResolvedExperiment {
    std::string id;
    Profile profile = Profile::Desk;
    KeyValueConfig config;

    CoefficientField field = CoefficientField::periodic1d(1.1, {}, 0.01);
    int dim = 1;

    int macro_n = 0;
    double macro_cfl = 0.5;
    double macro_dt_over_h = 0.0;  // overrides the cfl rule when positive
    double T = 1.0;

    MicroParams micro;

    bool solve_hmm = true;
    bool solve_hom = true;
    bool solve_dns = false;
    int dns_n = 0;
    double dns_cfl = 0.5;

    std::string dedup = "auto";  // auto | on | off
    std::int64_t snapshot_stride = 0;
    std::uint64_t seed = 0;

    // Initial data (Gaussian pulse).
    double pulse_center = 0.5;
    double pulse_sigma = 0.1;

    // Kernel study.
    std::string study_variant = "fast";  // fast | fast_slow
    int study_ratio_min = 2;
    int study_ratio_max = 10;

    // Long-time runner.
    double longtime_eta_over_eps = 2.5;
    int fit_n = 32;
    double beta_max = 0.0;  // 0 = grid default
    int dns_n_alt = 0;      // second DNS resolution for the beta stability check

    std::string out_dir = "out";
    bool emit_plot_data = false;
};

ResolvedExperiment resolve_experiment(const KeyValueConfig& config);

struct RunResult {
    std::string id;
    std::map<std::string, double> metrics;
    std::vector<std::string> record_header;
    std::vector<std::vector<std::string>> records;
    std::vector<std::pair<std::string, Trajectory>> trajectories;
    std::int64_t micro_solves = 0;
    double wall_seconds = 0.0;
};

// Gaussian initial displacement exp(-|x-c|^2 / sigma^2), zero velocity.
ScalarField gaussian_pulse(const ResolvedExperiment& exp);

// Face centers of the macro grid (d * n^d points).
std::vector<Point> macro_face_points(int dim, int n);

// Runners. run_example dispatches example1..example6; the study and the
// long-time regime have their own entry points.
RunResult run_example(const ResolvedExperiment& exp);
RunResult run_kernel_convergence(const ResolvedExperiment& exp);
RunResult run_longtime(const ResolvedExperiment& exp);

// eta = tau = eps^(1 - 2/q): the box rule making the averaging error
// (eps/eta)^q fall below eps^2.
double longtime_eta_rule(double eps, int q);

// Least-squares slope of log(err) against log(ratio).
double loglog_slope(const std::vector<double>& ratios, const std::vector<double>& errors);

// Writes snapshots/, records.csv, summary.json and (optionally) fig_*.csv
// under exp.out_dir/<id>; returns the summary JSON text.
std::string write_outputs(const ResolvedExperiment& exp, const RunResult& result);

}  // namespace hmmwave

#endif
