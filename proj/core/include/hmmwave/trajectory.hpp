#ifndef HMMWAVE_TRAJECTORY_HPP
#define HMMWAVE_TRAJECTORY_HPP

#include <vector>

#include "hmmwave/fd_core.hpp"

namespace hmmwave {

struct Snapshot {
    double time = 0.0;
    std::vector<double> u;
};

struct Trajectory {
    PeriodicGrid grid;
    double dt = 0.0;
    std::int64_t steps = 0;
    std::vector<Snapshot> snapshots;

    const Snapshot& final_snapshot() const {
        if (snapshots.empty()) throw Error("trajectory: no snapshots recorded");
        return snapshots.back();
    }
};

// Splits T into an integer number of steps no larger than dt_target.
inline std::int64_t snap_steps(double T, double dt_target) {
    if (T <= 0.0) return 0;
    return static_cast<std::int64_t>(std::ceil(T / dt_target - 1e-12));
}

// Restriction of a fine snapshot to a coarser nested grid (point sampling at
// shared nodes); fine_n must be an integer multiple of coarse_n.
std::vector<double> restrict_to_grid(const std::vector<double>& fine, int fine_n, int coarse_n,
                                     int dim);

// Max-abs or h^d-weighted L2 distance between snapshots on a common grid.
enum class ErrorNorm { LInf, L2 };
double grid_error(const std::vector<double>& a, const std::vector<double>& b, ErrorNorm norm,
                  int dim, double h);

}  // namespace hmmwave

#endif
