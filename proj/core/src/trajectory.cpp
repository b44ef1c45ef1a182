#include "hmmwave/trajectory.hpp"

#include <cmath>

namespace hmmwave {

std::vector<double> restrict_to_grid(const std::vector<double>& fine, int fine_n, int coarse_n,
                                     int dim) {
    if (coarse_n <= 0 || fine_n % coarse_n != 0)
        throw Error("restrict: grids are not nested");
    const int ratio = fine_n / coarse_n;
    std::int64_t coarse_cells = 1;
    for (int d = 0; d < dim; ++d) coarse_cells *= coarse_n;
    std::vector<double> out(coarse_cells);
    auto fine_index = [&](int i, int j, int k) {
        return static_cast<std::int64_t>(i) +
               static_cast<std::int64_t>(fine_n) *
                   (static_cast<std::int64_t>(j) + static_cast<std::int64_t>(fine_n) * k);
    };
    std::int64_t c = 0;
    for (int k = 0; k < ((dim == 3) ? coarse_n : 1); ++k)
        for (int j = 0; j < ((dim >= 2) ? coarse_n : 1); ++j)
            for (int i = 0; i < coarse_n; ++i)
                out[c++] = fine[fine_index(i * ratio, j * ratio, k * ratio)];
    return out;
}

double grid_error(const std::vector<double>& a, const std::vector<double>& b, ErrorNorm norm,
                  int dim, double h) {
    if (a.size() != b.size()) throw Error("grid_error: snapshots live on different grids");
    if (norm == ErrorNorm::LInf) {
        double m = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
        return m;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s * std::pow(h, dim));
}

}  // namespace hmmwave
