#include "hmmwave/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace hmmwave {

namespace {

constexpr int kRefIntervals = 10000;

double ipow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}

// I(k, s) = integral over [-1,1] of x^k (1-x^2)^s dx, k even.
// Equals B((k+1)/2, s+1) by substitution u = x^2.
double bump_moment(int k, int s) {
    if (k % 2 != 0) return 0.0;
    double a = 0.5 * (k + 1);
    double b = s + 1.0;
    return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

// Solves A c = rhs in place with partial pivoting; returns an estimate of the
// infinity-norm condition number via explicit inversion (matrices here are
// tiny: one row per even moment condition).
double solve_with_condition(std::vector<double>& A, std::vector<double>& c, int n) {
    std::vector<double> inv(n * n, 0.0);
    for (int i = 0; i < n; ++i) inv[i * n + i] = 1.0;

    double norm_a = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row += std::fabs(A[i * n + j]);
        norm_a = std::max(norm_a, row);
    }

    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(A[r * n + col]) > std::fabs(A[piv * n + col])) piv = r;
        if (A[piv * n + col] == 0.0) return std::numeric_limits<double>::infinity();
        if (piv != col) {
            for (int j = 0; j < n; ++j) {
                std::swap(A[piv * n + j], A[col * n + j]);
                std::swap(inv[piv * n + j], inv[col * n + j]);
            }
            std::swap(c[piv], c[col]);
        }
        double d = A[col * n + col];
        for (int j = 0; j < n; ++j) {
            A[col * n + j] /= d;
            inv[col * n + j] /= d;
        }
        c[col] /= d;
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = A[r * n + col];
            if (f == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                A[r * n + j] -= f * A[col * n + j];
                inv[r * n + j] -= f * inv[col * n + j];
            }
            c[r] -= f * c[col];
        }
    }

    double norm_inv = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row += std::fabs(inv[i * n + j]);
        norm_inv = std::max(norm_inv, row);
    }
    return norm_a * norm_inv;
}

struct MomentCtx {
    const Kernel* k;
    int r;
};

double moment_integrand(double x, const void* ctx) {
    const auto* m = static_cast<const MomentCtx*>(ctx);
    return (*m->k)(x)*ipow(x, m->r);
}

}  // namespace

double kernel_reference_integral(double (*f)(double, const void*), const void* ctx) {
    const double h = 2.0 / kRefIntervals;
    double sum = 0.5 * (f(-1.0, ctx) + f(1.0, ctx));
    for (int i = 1; i < kRefIntervals; ++i) sum += f(-1.0 + i * h, ctx);
    return sum * h;
}

Kernel Kernel::polynomial(int p, int q) {
    if (p < 1) throw Error("kernel: moment order p must be >= 1");
    if (q < 0) throw Error("kernel: smoothness q must be >= 0");

    // Even moment conditions r = 0, 2, ..., 2*floor(p/2); odd moments vanish
    // by parity. One polynomial coefficient per condition.
    const int n = p / 2 + 1;
    std::vector<double> A(n * n);
    std::vector<double> rhs(n, 0.0);
    rhs[0] = 1.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A[i * n + j] = bump_moment(2 * (i + j), q + 1);

    double cond = solve_with_condition(A, rhs, n);
    if (!(cond < 1e12))
        throw Error("kernel: moment system for poly(" + std::to_string(p) + "," +
                    std::to_string(q) + ") is numerically singular (cond ~ " +
                    std::to_string(cond) + ")");

    Kernel k;
    k.form_ = Form::PolynomialBump;
    k.p_ = p;
    k.q_ = q;
    k.poly_ = rhs;

    // Pin unit mass under the reference quadrature (the analytic solve is
    // already within rounding of it).
    MomentCtx ctx{&k, 0};
    double mass = kernel_reference_integral(moment_integrand, &ctx);
    for (double& c : k.poly_) c /= mass;
    return k;
}

Kernel Kernel::exponential() {
    Kernel k;
    k.form_ = Form::Exponential;
    k.p_ = 1;
    k.q_ = kInfiniteSmoothness;
    k.c0_ = 1.0;
    MomentCtx ctx{&k, 0};
    k.c0_ = 1.0 / kernel_reference_integral(moment_integrand, &ctx);
    return k;
}

Kernel Kernel::parse(const std::string& text) {
    if (text == "exp") return exponential();
    int p = 0, q = 0;
    if (std::sscanf(text.c_str(), "poly(%d,%d)", &p, &q) == 2) return polynomial(p, q);
    if (std::sscanf(text.c_str(), "poly(%d, %d)", &p, &q) == 2) return polynomial(p, q);
    throw Error("kernel: cannot parse '" + text + "' (expected poly(p,q) or exp)");
}

std::string Kernel::name() const {
    if (form_ == Form::Exponential) return "exp";
    return "poly(" + std::to_string(p_) + "," + std::to_string(q_) + ")";
}

double Kernel::operator()(double x) const {
    double x2 = x * x;
    if (x2 >= 1.0) return 0.0;
    if (form_ == Form::Exponential) return c0_ * std::exp(5.0 / (x2 - 1.0));
    double px = 0.0;
    for (auto it = poly_.rbegin(); it != poly_.rend(); ++it) px = px * x2 + *it;
    return px * ipow(1.0 - x2, q_ + 1);
}

double Kernel::scaled(double eta, double x) const {
    return (*this)(x / eta) / eta;
}

double Kernel::tensor_weight(double eta, const Point& x, int dim) const {
    double w = 1.0;
    for (int k = 0; k < dim; ++k) w *= scaled(eta, x[k]);
    return w;
}

double Kernel::moment(int r) const {
    if (r < 0) throw Error("kernel: moment order must be >= 0");
    MomentCtx ctx{this, r};
    return kernel_reference_integral(moment_integrand, &ctx);
}

}  // namespace hmmwave
