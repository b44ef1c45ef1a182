#include "hmmwave/types.hpp"

#include <algorithm>

namespace hmmwave {

namespace {

// Eigenvalues of the leading dim x dim symmetric block by cyclic Jacobi.
std::array<double, 3> sym_eigenvalues(Matrix3 m, int dim) {
    for (int sweep = 0; sweep < 32; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < dim; ++i)
            for (int j = i + 1; j < dim; ++j) off += m(i, j) * m(i, j);
        if (off < 1e-30) break;
        for (int p = 0; p < dim; ++p) {
            for (int q = p + 1; q < dim; ++q) {
                if (m(p, q) == 0.0) continue;
                double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                Matrix3 r = m;
                for (int k = 0; k < dim; ++k) {
                    r(p, k) = c * m(p, k) - s * m(q, k);
                    r(q, k) = s * m(p, k) + c * m(q, k);
                }
                Matrix3 r2 = r;
                for (int k = 0; k < dim; ++k) {
                    r2(k, p) = c * r(k, p) - s * r(k, q);
                    r2(k, q) = s * r(k, p) + c * r(k, q);
                }
                m = r2;
            }
        }
    }
    std::array<double, 3> ev{};
    for (int k = 0; k < dim; ++k) ev[k] = m(k, k);
    return ev;
}

}  // namespace

double Matrix3::sym_norm2(int dim) const {
    auto ev = sym_eigenvalues(*this, dim);
    double m = 0.0;
    for (int k = 0; k < dim; ++k) m = std::max(m, std::fabs(ev[k]));
    return m;
}

double Matrix3::sym_min_eigenvalue(int dim) const {
    auto ev = sym_eigenvalues(*this, dim);
    double m = ev[0];
    for (int k = 1; k < dim; ++k) m = std::min(m, ev[k]);
    return m;
}

}  // namespace hmmwave
