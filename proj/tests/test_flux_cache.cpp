#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "hmmwave/experiments.hpp"
#include "hmmwave/flux_cache.hpp"

using namespace hmmwave;

namespace {

MicroParams small_params(double eps) {
    MicroParams mp;
    mp.eta = 3.0 * eps;
    mp.tau = 3.0 * eps;
    mp.h_per_eps = 32;
    mp.space_kernel = Kernel::polynomial(5, 6);
    mp.time_kernel = Kernel::polynomial(5, 6);
    return mp;
}

}  // namespace

TEST_CASE("should_dedup") {
    auto fast = CoefficientField::periodic1d(1.1, {TrigTerm{1.0, 1, true}}, 0.01);
    CHECK(should_dedup(fast, 0.05));           // H = 5 eps
    CHECK_FALSE(should_dedup(fast, 0.025));    // H = 2.5 eps
    auto slow = CoefficientField::locally_periodic1d(1.1, TrigTerm{0.5, 1, false},
                                                     TrigTerm{0.5, 1, true}, 0.01);
    CHECK_FALSE(should_dedup(slow, 1.0 / 300.0));
    auto tab = CoefficientField::tabulated1d({1.0, 2.0, 1.0, 0.6}, 0.1);
    CHECK_FALSE(should_dedup(tab, 0.1));
}

TEST_CASE("solve counts") {
    SUBCASE("locally periodic field: one point per distinct face") {
        auto field = CoefficientField::locally_periodic1d(1.1, TrigTerm{0.5, 1, false},
                                                          TrigTerm{0.5, 1, true}, 0.05);
        std::vector<Point> faces;
        for (int m = 0; m < 10; ++m) faces.push_back({(m + 0.5) / 10.0, 0, 0});
        FluxTable t = precompute(faces, small_params(0.05), field, false);
        CHECK(t.solve_count() == 10);
        CHECK(t.entry_count() == 10);
    }
    SUBCASE("pure fast scale with H = n eps: d solves in total") {
        auto field = CoefficientField::periodic1d(1.1, {TrigTerm{1.0, 1, true}}, 0.01);
        std::vector<Point> faces = macro_face_points(1, 20);  // H = 0.05 = 5 eps
        REQUIRE(should_dedup(field, 0.05));
        FluxTable t = precompute(faces, small_params(0.01), field, true);
        CHECK(t.solve_count() == 1);
        CHECK(t.entry_count() == 1);
    }
    SUBCASE("2D dedup: two solves for a 10x10 grid") {
        auto field = CoefficientField::diagonal_nd(
            2, CoefficientField::periodic1d(1.1, {TrigTerm{1.0, 1, true}}, 0.01));
        std::vector<Point> faces = macro_face_points(2, 10);  // H = 0.1 = 10 eps
        REQUIRE(should_dedup(field, 0.1));
        FluxTable t = precompute(faces, small_params(0.01), field, true);
        CHECK(t.solve_count() == 2);
        CHECK(t.entry_count() == 1);
    }
    SUBCASE("mod-eps keying collapses faces when H is not a multiple of eps") {
        // H = 2.5 eps: two congruence classes per face family, and the field
        // only depends on the first coordinate.
        auto field = CoefficientField::diagonal_nd(
            2, CoefficientField::periodic1d(1.1, {TrigTerm{1.0, 1, true}}, 0.1));
        std::vector<Point> faces = macro_face_points(2, 4);  // H = 0.25
        REQUIRE_FALSE(should_dedup(field, 0.25));
        FluxTable t = precompute(faces, small_params(0.1), field, false);
        CHECK(t.entry_count() == 4);
        CHECK(t.solve_count() == 8);
    }
}

TEST_CASE("evaluation") {
    auto field = CoefficientField::diagonal_nd(
        2, CoefficientField::periodic1d(1.1, {TrigTerm{1.0, 1, true}}, 0.01));
    std::vector<Point> faces = macro_face_points(2, 10);
    FluxTable t = precompute(faces, small_params(0.01), field, true);

    SUBCASE("basis vectors return stored columns exactly") {
        const FluxBasis& b = t.basis_at(faces[0]);
        Point f1 = t.eval(faces[0], {0, 1, 0});
        CHECK(f1[0] == b.columns[1][0]);
        CHECK(f1[1] == b.columns[1][1]);
    }
    SUBCASE("zero gradient gives the zero vector") {
        Point f = t.eval(faces[3], {0, 0, 0});
        CHECK(f[0] == 0.0);
        CHECK(f[1] == 0.0);
    }
    SUBCASE("random gradients match a fresh micro solve") {
        std::mt19937_64 rng(13579);
        std::uniform_real_distribution<double> unif(-1.5, 1.5);
        Point p{unif(rng), unif(rng), 0};
        Point cached = t.eval(faces[0], p);
        Point rep = t.canonical_point(faces[0]);
        Point fresh = solve_and_average(assemble(rep, p, small_params(0.01), field), field);
        for (int d = 0; d < 2; ++d)
            CHECK(std::fabs(cached[d] - fresh[d]) <= 1e-10 * (norm2(p, 2) * 2.1 + 1e-30));
    }
}

TEST_CASE("unknown points are rejected when dedup is off") {
    auto field = CoefficientField::locally_periodic1d(1.1, TrigTerm{0.5, 1, false},
                                                      TrigTerm{0.5, 1, true}, 0.05);
    std::vector<Point> faces = {{0.25, 0, 0}, {0.75, 0, 0}};
    FluxTable t = precompute(faces, small_params(0.05), field, false);
    CHECK_THROWS_AS(t.basis_at({0.33, 0, 0}), Error);
}

TEST_CASE("csv round trip") {
    auto field = CoefficientField::locally_periodic1d(1.1, TrigTerm{0.5, 1, false},
                                                      TrigTerm{0.5, 1, true}, 0.05);
    std::vector<Point> faces = {{0.25, 0, 0}, {0.75, 0, 0}};
    FluxTable t = precompute(faces, small_params(0.05), field, false);

    std::ostringstream out;
    t.export_csv(out);
    std::istringstream in(out.str());
    FluxTable t2 = FluxTable::import_csv(in, field, false);

    CHECK(t2.entry_count() == t.entry_count());
    for (const Point& x : faces) {
        Point a = t.eval(x, {1.3, 0, 0});
        Point b = t2.eval(x, {1.3, 0, 0});
        CHECK(a[0] == b[0]);
    }
}
