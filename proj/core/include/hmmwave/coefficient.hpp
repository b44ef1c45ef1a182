#ifndef HMMWAVE_COEFFICIENT_HPP
#define HMMWAVE_COEFFICIENT_HPP

#include <functional>
#include <utility>
#include <vector>

#include "hmmwave/types.hpp"

namespace hmmwave {

// amplitude * sin(2 pi frequency * arg)  or  amplitude * cos(...)
struct TrigTerm {
    double amplitude = 0.0;
    int frequency = 1;
    bool is_sin = true;

    double operator()(double arg) const {
        double t = 2.0 * M_PI * frequency * arg;
        return amplitude * (is_sin ? std::sin(t) : std::cos(t));
    }
};

enum class FieldForm { Periodic1D, LocallyPeriodic1D, MultiFrequency1D, DiagonalND, Tabulated1D };

// Closed-form effective coefficient, when one exists for the field family.
class HomogenizedReference {
  public:
    enum class Form { ConstantMatrix, ClosedForm1D, DiagonalClosedForm, Unavailable };

    static HomogenizedReference unavailable();
    static HomogenizedReference constant(int dim, const Matrix3& m);
    static HomogenizedReference closed_form_1d(std::function<double(double)> abar);
    static HomogenizedReference diagonal_closed_form(int dim,
                                                     std::function<double(double)> first,
                                                     std::function<double(double)> others);

    Form form() const { return form_; }
    bool available() const { return form_ != Form::Unavailable; }
    int dimension() const { return dim_; }

    Matrix3 eval(const Point& x) const;
    const Matrix3& constant_matrix() const;

  private:
    Form form_ = Form::Unavailable;
    int dim_ = 0;
    Matrix3 constant_{};
    std::function<double(double)> first_;
    std::function<double(double)> others_;
};

// Oscillatory coefficient A_eps(x) for the example families: a scalar
// generator applied to every diagonal entry (all families here are diagonal
// and vary along the first coordinate only).
class CoefficientField {
  public:
    // a(y) = offset + sum of fast terms, evaluated at y = x/eps.
    static CoefficientField periodic1d(double offset, std::vector<TrigTerm> fast, double eps);

    // a(x,y) = offset + slow(x) + fast(y), y = x/eps.
    static CoefficientField locally_periodic1d(double offset, TrigTerm slow, TrigTerm fast,
                                               double eps);

    // a(x) = offset + sum_i amp_i sin(2 pi x / eps_i).
    static CoefficientField multi_frequency1d(double offset,
                                              std::vector<std::pair<double, double>> amp_eps);

    // A(x) = diag(g(x_1), ..., g(x_1)) from a 1D generator field g.
    static CoefficientField diagonal_nd(int dim, CoefficientField generator);

    // Periodic piecewise-linear interpolation of samples at uniform spacing;
    // the period is samples.size() * spacing.
    static CoefficientField tabulated1d(std::vector<double> samples, double spacing);

    int dimension() const { return dim_; }
    FieldForm form() const { return form_; }

    // Micro scale used for box sizing; the middle of the list for the
    // multi-frequency family.
    double epsilon() const { return eps_; }
    const std::vector<double>& epsilon_list() const { return eps_list_; }

    double scalar(double x1) const;
    Matrix3 eval(const Point& x) const;

    HomogenizedReference homogenized() const;

    // Upper bound for sup_x ||A(x)||_2 (analytic for trig forms, sampled max
    // times 1.05 for tabulated fields).
    double sup_norm_bound() const;

    // True when A(x + eps e_k) = A(x) holds for every axis.
    bool fast_scale_periodic() const;

    // Coordinates the value actually depends on.
    std::array<bool, 3> dependent_axes() const;

  private:
    CoefficientField() = default;

    FieldForm form_ = FieldForm::Periodic1D;
    int dim_ = 1;
    double eps_ = 0.0;
    double offset_ = 0.0;
    std::vector<TrigTerm> fast_;
    TrigTerm slow_{};
    bool has_slow_ = false;
    std::vector<double> eps_list_;
    std::vector<double> amp_list_;
    std::vector<double> samples_;
    double spacing_ = 0.0;
};

}  // namespace hmmwave

#endif
