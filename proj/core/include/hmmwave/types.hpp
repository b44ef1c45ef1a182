#ifndef HMMWAVE_TYPES_HPP
#define HMMWAVE_TYPES_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hmmwave {

// Spatial point / vector. Only the first `dim` components of a given context
// are meaningful; the rest stay zero.
using Point = std::array<double, 3>;

inline Point make_point(double x0, double x1 = 0.0, double x2 = 0.0) {
    return {x0, x1, x2};
}

inline double dot(const Point& a, const Point& b, int dim) {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) s += a[k] * b[k];
    return s;
}

inline double norm2(const Point& a, int dim) {
    return std::sqrt(dot(a, a, dim));
}

// Dense d x d matrix stored row-major in a 3x3 block (d <= 3).
struct Matrix3 {
    std::array<double, 9> a{};

    double& operator()(int i, int j) { return a[3 * i + j]; }
    double operator()(int i, int j) const { return a[3 * i + j]; }

    static Matrix3 diagonal(double d0, double d1 = 0.0, double d2 = 0.0) {
        Matrix3 m;
        m(0, 0) = d0;
        m(1, 1) = d1;
        m(2, 2) = d2;
        return m;
    }

    static Matrix3 scaled_identity(int dim, double c) {
        Matrix3 m;
        for (int k = 0; k < dim; ++k) m(k, k) = c;
        return m;
    }

    Point apply(const Point& x, int dim) const {
        Point y{};
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) y[i] += (*this)(i, j) * x[j];
        return y;
    }

    // Spectral norm of the leading dim x dim block (symmetric input assumed).
    double sym_norm2(int dim) const;

    // Smallest eigenvalue of the leading dim x dim block (symmetric input).
    double sym_min_eigenvalue(int dim) const;
};

class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hmmwave

#endif
