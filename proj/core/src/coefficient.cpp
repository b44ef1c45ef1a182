#include "hmmwave/coefficient.hpp"

#include <algorithm>
#include <cmath>

namespace hmmwave {

// --- HomogenizedReference ---------------------------------------------------

HomogenizedReference HomogenizedReference::unavailable() { return {}; }

HomogenizedReference HomogenizedReference::constant(int dim, const Matrix3& m) {
    HomogenizedReference r;
    r.form_ = Form::ConstantMatrix;
    r.dim_ = dim;
    r.constant_ = m;
    return r;
}

HomogenizedReference HomogenizedReference::closed_form_1d(std::function<double(double)> abar) {
    HomogenizedReference r;
    r.form_ = Form::ClosedForm1D;
    r.dim_ = 1;
    r.first_ = std::move(abar);
    return r;
}

HomogenizedReference HomogenizedReference::diagonal_closed_form(
    int dim, std::function<double(double)> first, std::function<double(double)> others) {
    HomogenizedReference r;
    r.form_ = Form::DiagonalClosedForm;
    r.dim_ = dim;
    r.first_ = std::move(first);
    r.others_ = std::move(others);
    return r;
}

Matrix3 HomogenizedReference::eval(const Point& x) const {
    switch (form_) {
        case Form::ConstantMatrix:
            return constant_;
        case Form::ClosedForm1D:
            return Matrix3::scaled_identity(1, first_(x[0]));
        case Form::DiagonalClosedForm: {
            Matrix3 m;
            m(0, 0) = first_(x[0]);
            for (int k = 1; k < dim_; ++k) m(k, k) = others_(x[0]);
            return m;
        }
        case Form::Unavailable:
            break;
    }
    throw Error("homogenized reference: evaluation of an Unavailable reference");
}

const Matrix3& HomogenizedReference::constant_matrix() const {
    if (form_ != Form::ConstantMatrix)
        throw Error("homogenized reference: not a constant matrix");
    return constant_;
}

// --- CoefficientField -------------------------------------------------------

CoefficientField CoefficientField::periodic1d(double offset, std::vector<TrigTerm> fast,
                                              double eps) {
    if (eps <= 0.0) throw Error("coefficient: eps must be positive");
    CoefficientField f;
    f.form_ = FieldForm::Periodic1D;
    f.dim_ = 1;
    f.offset_ = offset;
    f.fast_ = std::move(fast);
    f.eps_ = eps;
    return f;
}

CoefficientField CoefficientField::locally_periodic1d(double offset, TrigTerm slow,
                                                      TrigTerm fast, double eps) {
    if (eps <= 0.0) throw Error("coefficient: eps must be positive");
    CoefficientField f;
    f.form_ = FieldForm::LocallyPeriodic1D;
    f.dim_ = 1;
    f.offset_ = offset;
    f.slow_ = slow;
    f.has_slow_ = true;
    f.fast_ = {fast};
    f.eps_ = eps;
    return f;
}

CoefficientField CoefficientField::multi_frequency1d(
    double offset, std::vector<std::pair<double, double>> amp_eps) {
    if (amp_eps.empty()) throw Error("coefficient: multi-frequency list is empty");
    CoefficientField f;
    f.form_ = FieldForm::MultiFrequency1D;
    f.dim_ = 1;
    f.offset_ = offset;
    for (auto& [amp, eps] : amp_eps) {
        if (eps <= 0.0) throw Error("coefficient: eps must be positive");
        f.amp_list_.push_back(amp);
        f.eps_list_.push_back(eps);
    }
    f.eps_ = f.eps_list_[f.eps_list_.size() / 2];
    return f;
}

CoefficientField CoefficientField::diagonal_nd(int dim, CoefficientField generator) {
    if (dim < 2 || dim > 3) throw Error("coefficient: diagonal_nd needs dim 2 or 3");
    if (generator.dim_ != 1) throw Error("coefficient: diagonal_nd generator must be 1D");
    CoefficientField f = std::move(generator);
    f.form_ = FieldForm::DiagonalND;
    f.dim_ = dim;
    return f;
}

CoefficientField CoefficientField::tabulated1d(std::vector<double> samples, double spacing) {
    if (samples.size() < 2) throw Error("coefficient: tabulated field needs >= 2 samples");
    if (spacing <= 0.0) throw Error("coefficient: tabulated spacing must be positive");
    CoefficientField f;
    f.form_ = FieldForm::Tabulated1D;
    f.dim_ = 1;
    f.samples_ = std::move(samples);
    f.spacing_ = spacing;
    f.eps_ = f.spacing_ * static_cast<double>(f.samples_.size());
    return f;
}

double CoefficientField::scalar(double x1) const {
    switch (form_) {
        case FieldForm::Tabulated1D: {
            const auto n = samples_.size();
            double period = spacing_ * static_cast<double>(n);
            double s = x1 - period * std::floor(x1 / period);
            double u = s / spacing_;
            auto i = static_cast<std::size_t>(u);
            if (i >= n) i = n - 1;
            double frac = u - static_cast<double>(i);
            return samples_[i] + frac * (samples_[(i + 1) % n] - samples_[i]);
        }
        case FieldForm::MultiFrequency1D: {
            double v = offset_;
            for (std::size_t i = 0; i < amp_list_.size(); ++i)
                v += amp_list_[i] * std::sin(2.0 * M_PI * x1 / eps_list_[i]);
            return v;
        }
        default: {
            double v = offset_;
            if (has_slow_) v += slow_(x1);
            double y = x1 / eps_;
            for (const auto& t : fast_) v += t(y);
            return v;
        }
    }
}

Matrix3 CoefficientField::eval(const Point& x) const {
    return Matrix3::scaled_identity(dim_, scalar(x[0]));
}

HomogenizedReference CoefficientField::homogenized() const {
    switch (form_) {
        case FieldForm::Periodic1D:
        case FieldForm::DiagonalND: {
            if (has_slow_) {
                // Locally periodic generator inside a diagonal field.
                if (fast_.size() != 1) return HomogenizedReference::unavailable();
                double offset = offset_;
                TrigTerm slow = slow_;
                double beta = fast_[0].amplitude;
                auto alpha = [offset, slow](double x) { return offset + slow(x); };
                auto abar = [alpha, beta](double x) {
                    return std::sqrt(alpha(x) * alpha(x) - beta * beta);
                };
                if (form_ == FieldForm::Periodic1D)
                    return HomogenizedReference::closed_form_1d(abar);
                return HomogenizedReference::diagonal_closed_form(dim_, abar, alpha);
            }
            if (fast_.empty())
                return HomogenizedReference::constant(
                    dim_, Matrix3::scaled_identity(dim_, offset_));
            if (fast_.size() != 1) return HomogenizedReference::unavailable();
            // Harmonic average of offset + amp*trig over one period:
            // (int dy / a)^-1 = sqrt(offset^2 - amp^2), phase-independent.
            double amp = fast_[0].amplitude;
            if (std::fabs(amp) >= offset_)
                throw Error("coefficient: field is not uniformly elliptic");
            double abar = std::sqrt(offset_ * offset_ - amp * amp);
            Matrix3 m;
            m(0, 0) = abar;
            for (int k = 1; k < dim_; ++k) m(k, k) = offset_;
            return HomogenizedReference::constant(dim_, m);
        }
        case FieldForm::LocallyPeriodic1D: {
            double offset = offset_;
            TrigTerm slow = slow_;
            double beta = fast_[0].amplitude;
            return HomogenizedReference::closed_form_1d([offset, slow, beta](double x) {
                double alpha = offset + slow(x);
                return std::sqrt(alpha * alpha - beta * beta);
            });
        }
        case FieldForm::MultiFrequency1D:
        case FieldForm::Tabulated1D:
            return HomogenizedReference::unavailable();
    }
    return HomogenizedReference::unavailable();
}

double CoefficientField::sup_norm_bound() const {
    switch (form_) {
        case FieldForm::Tabulated1D: {
            double m = 0.0;
            for (double s : samples_) m = std::max(m, std::fabs(s));
            return 1.05 * m;
        }
        case FieldForm::MultiFrequency1D: {
            double b = offset_;
            for (double a : amp_list_) b += std::fabs(a);
            return b;
        }
        default: {
            double b = offset_;
            if (has_slow_) b += std::fabs(slow_.amplitude);
            for (const auto& t : fast_) b += std::fabs(t.amplitude);
            return b;
        }
    }
}

bool CoefficientField::fast_scale_periodic() const {
    if (has_slow_) return false;
    return form_ == FieldForm::Periodic1D || form_ == FieldForm::DiagonalND;
}

std::array<bool, 3> CoefficientField::dependent_axes() const {
    // Every family here is generated by a scalar in the first coordinate.
    return {true, false, false};
}

}  // namespace hmmwave
