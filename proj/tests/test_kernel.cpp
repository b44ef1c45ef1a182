#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "hmmwave/kernel.hpp"

using hmmwave::Kernel;

namespace {

// Independent quadrature oracle: plain composite trapezoid, kept separate
// from the module's reference integral.
double trapezoid(const std::function<double(double)>& f, double a, double b, int intervals) {
    double h = (b - a) / intervals;
    double s = 0.5 * (f(a) + f(b));
    for (int i = 1; i < intervals; ++i) s += f(a + i * h);
    return s * h;
}

double oracle_moment(const Kernel& k, int r, double a = -1.0, double b = 1.0,
                     int intervals = 10000) {
    return trapezoid([&](double x) { return k(x) * std::pow(x, r); }, a, b, intervals);
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Centered finite difference of order m at x with step h.
double central_difference(const Kernel& k, int m, double x, double h) {
    double s = 0.0;
    for (int l = 0; l <= m; ++l) {
        double sign = (l % 2 == 0) ? 1.0 : -1.0;
        s += sign * binomial(m, l) * k(x + (0.5 * m - l) * h);
    }
    return s;
}

}  // namespace

TEST_CASE("polynomial kernels satisfy the moment conditions") {
    const std::vector<std::pair<int, int>> used = {{1, 1}, {1, 9}, {5, 6}, {9, 9}};
    for (auto [p, q] : used) {
        CAPTURE(p);
        CAPTURE(q);
        Kernel k = Kernel::polynomial(p, q);
        CHECK(std::fabs(oracle_moment(k, 0) - 1.0) <= 1e-12);
        for (int r = 1; r <= p; ++r) {
            CAPTURE(r);
            CHECK(std::fabs(oracle_moment(k, r)) <= 1e-10);
        }
    }
}

TEST_CASE("first non-vanishing even moment confirms minimal degree") {
    Kernel k56 = Kernel::polynomial(5, 6);
    CHECK(std::fabs(oracle_moment(k56, 6)) > 1e-6);
    Kernel k99 = Kernel::polynomial(9, 9);
    CHECK(std::fabs(oracle_moment(k99, 9)) <= 1e-10);
    CHECK(std::fabs(oracle_moment(k99, 10)) > 1e-6);
}

TEST_CASE("kernel support and boundary values") {
    for (const Kernel& k : {Kernel::polynomial(5, 6), Kernel::exponential()}) {
        CHECK(k(1.0) == 0.0);
        CHECK(k(-1.0) == 0.0);
        CHECK(k(1.5) == 0.0);
        CHECK(k(0.0) > 0.0);
    }
}

TEST_CASE("exponential kernel") {
    Kernel k = Kernel::exponential();
    CHECK(k.moment_order() == 1);
    CHECK(k.smoothness() == Kernel::kInfiniteSmoothness);
    CHECK(std::fabs(oracle_moment(k, 0) - 1.0) <= 1e-10);
    // Essential-singularity decay toward the support boundary.
    CHECK(k(0.999) < 1e-3 * k(0.0));
    // K(0) = C0 * exp(-5), with C0 recovered from any interior value.
    double c0 = k(0.0) * std::exp(5.0);
    CHECK(k(0.5) == doctest::Approx(c0 * std::exp(5.0 / (0.25 - 1.0))).epsilon(1e-12));
}

TEST_CASE("scaled evaluation") {
    Kernel k = Kernel::polynomial(5, 6);
    CHECK(k.scaled(1.0, 0.0) == k(0.0));
    CHECK(k.scaled(0.1, 0.3) == 0.0);
    double eta = 0.1;
    double mass = trapezoid([&](double x) { return k.scaled(eta, x); }, -eta, eta, 20000);
    CHECK(std::fabs(mass - 1.0) <= 1e-10);
}

TEST_CASE("tensor weights multiply 1D factors") {
    Kernel k = Kernel::polynomial(1, 9);
    double eta = 0.7;
    CHECK(k.tensor_weight(eta, {0.2, 0.0, 0.0}, 1) == k.scaled(eta, 0.2));
    CHECK(k.tensor_weight(eta, {0.0, 2.0 * eta, 0.0}, 2) == 0.0);
}

TEST_CASE("3D tensor weight has unit mass") {
    Kernel k = Kernel::polynomial(1, 9);
    const int n = 200;
    const double h = 2.0 / n;
    // Trapezoid over the cube; the kernel vanishes on the boundary so the
    // plain sum is the trapezoid rule.
    double sum = 0.0;
    for (int a = 0; a <= n; ++a)
        for (int b = 0; b <= n; ++b)
            for (int c = 0; c <= n; ++c)
                sum += k.tensor_weight(1.0, {-1.0 + a * h, -1.0 + b * h, -1.0 + c * h}, 3);
    CHECK(std::fabs(sum * h * h * h - 1.0) <= 1e-8);
}

TEST_CASE("module moment operation matches the oracle") {
    Kernel k = Kernel::polynomial(5, 6);
    CHECK(std::fabs(k.moment(0) - 1.0) <= 1e-10);
    CHECK(std::fabs(k.moment(1)) <= 1e-12);
    CHECK(std::fabs(k.moment(6)) > 1e-6);
    CHECK(k.moment(6) == doctest::Approx(oracle_moment(k, 6)).epsilon(1e-12));
}

TEST_CASE("moment scaling invariance") {
    Kernel k = Kernel::polynomial(5, 6);
    double eta = 0.37;
    for (int r = 0; r <= 5; ++r) {
        double scaled = trapezoid([&](double x) { return k.scaled(eta, x) * std::pow(x, r); },
                                  -eta, eta, 40000);
        double expected = std::pow(eta, r) * oracle_moment(k, r);
        CHECK(std::fabs(scaled - expected) <= 1e-8 * std::max(1.0, std::fabs(expected)));
    }
}

TEST_CASE("difference quotients see C^q but not C^(q+2) behavior at the edge") {
    // Steps small enough for the stencil to sit in the asymptotic regime at
    // the support edge; differences there involve values of size O(h^(q+1)),
    // so cancellation noise stays relative.
    const double steps[3] = {0.01, 0.005, 0.0025};
    for (auto [p, q] :
         std::vector<std::pair<int, int>>{{1, 1}, {1, 9}, {5, 6}, {9, 9}}) {
        CAPTURE(p);
        CAPTURE(q);
        Kernel k = Kernel::polynomial(p, q);
        for (int s = 0; s + 1 < 3; ++s) {
            double h1 = steps[s], h2 = steps[s + 1];
            // Order-q quotients straddling x = 1 do not blow up under
            // refinement (K is C^q there; growth would double per halving).
            double bq1 = std::fabs(central_difference(k, q, 1.0, h1)) / std::pow(h1, q);
            double bq2 = std::fabs(central_difference(k, q, 1.0, h2)) / std::pow(h2, q);
            CHECK(bq2 <= 1.5 * bq1 + 1e-12);
            // Order-(q+2) quotients grow like 1/h: the (q+1)-th derivative
            // jumps across the support edge, so K is not C^(q+1) there.
            double gq1 = std::fabs(central_difference(k, q + 2, 1.0, h1)) / std::pow(h1, q + 2);
            double gq2 = std::fabs(central_difference(k, q + 2, 1.0, h2)) / std::pow(h2, q + 2);
            CHECK(gq2 >= 1.5 * gq1);
        }
    }
}

TEST_CASE("over-large moment systems are rejected") {
    CHECK_THROWS_AS(Kernel::polynomial(60, 2), hmmwave::Error);
}

TEST_CASE("kernel parsing") {
    CHECK(Kernel::parse("poly(5,6)").name() == "poly(5,6)");
    CHECK(Kernel::parse("exp").name() == "exp");
    CHECK(Kernel::parse("poly(9, 9)").moment_order() == 9);
    CHECK_THROWS_AS(Kernel::parse("gauss"), hmmwave::Error);
}
