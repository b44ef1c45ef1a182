#ifndef HMMWAVE_KERNEL_HPP
#define HMMWAVE_KERNEL_HPP

#include <string>
#include <vector>

#include "hmmwave/types.hpp"

namespace hmmwave {

// Averaging kernel K with unit mass, p vanishing moments and C^q regularity,
// supported on [-1,1]. All kernels built here are even, so odd moments vanish
// identically and time integrals can be folded onto t >= 0.
//
// Polynomial kernels have the form P(x^2) * (1-x^2)^(q+1) with P the minimal
// even polynomial solving the moment conditions; the exponential kernel is
// C0 * exp(5/(x^2-1)) with p = 1 and infinite smoothness.
class Kernel {
  public:
    enum class Form { PolynomialBump, Exponential };
    static constexpr int kInfiniteSmoothness = -1;

    static Kernel polynomial(int p, int q);
    static Kernel exponential();

    // Accepts "poly(p,q)" or "exp".
    static Kernel parse(const std::string& text);

    int moment_order() const { return p_; }
    int smoothness() const { return q_; }
    Form form() const { return form_; }
    std::string name() const;

    // K(x); zero for |x| >= 1.
    double operator()(double x) const;

    // K_eta(x) = K(x/eta)/eta; zero for |x| >= eta.
    double scaled(double eta, double x) const;

    // Product of scaled 1D evaluations over the first dim coordinates.
    double tensor_weight(double eta, const Point& x, int dim) const;

    // Trapezoid quadrature of K(t) t^r at the module reference resolution.
    double moment(int r) const;

  private:
    Kernel() = default;

    Form form_ = Form::PolynomialBump;
    int p_ = 1;
    int q_ = 1;
    std::vector<double> poly_;  // coefficients of P in powers of x^2
    double c0_ = 0.0;           // exponential normalization
};

// Composite trapezoid of f over [-1,1] at the module's reference resolution
// (1e4 intervals), shared by kernel normalization, moments and tests.
double kernel_reference_integral(double (*f)(double, const void*), const void* ctx);

}  // namespace hmmwave

#endif
