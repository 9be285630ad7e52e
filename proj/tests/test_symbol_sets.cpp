#include "doctest.h"

#include <random>

#include "umdlab/symbol_sets.hpp"

using namespace umdlab;

namespace {

const Scalar I(0.0, 1.0);

PointSet random_set(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<Scalar> v;
    for (int k = 0; k < n; ++k) v.emplace_back(u(rng), u(rng));
    return PointSet(v);
}

bool has_point(const std::vector<Scalar>& v, Scalar z) {
    for (const auto& w : v)
        if (std::abs(w - z) < 1e-12) return true;
    return false;
}

}  // namespace

TEST_CASE("hull examples") {
    auto seg = convex_hull(PointSet({-1.0, 1.0}));
    CHECK(seg.size() == 2);
    CHECK(has_point(seg.extreme_points(), -1.0));
    CHECK(has_point(seg.extreme_points(), 1.0));

    auto col = convex_hull(PointSet({0.0, 0.5, 1.0}));
    CHECK(col.size() == 2);
    CHECK(has_point(col.extreme_points(), 0.0));
    CHECK(has_point(col.extreme_points(), 1.0));

    auto sq = convex_hull(PointSet({1.0, I, -1.0, -I, 0.0}));
    CHECK(sq.size() == 4);
    for (Scalar z : {Scalar(1.0), I, Scalar(-1.0), -I}) CHECK(has_point(sq.extreme_points(), z));

    CHECK(convex_hull(PointSet({2.0, 2.0 + 1e-14})).size() == 1);
}

TEST_CASE("hull is counterclockwise") {
    auto sq = convex_hull(PointSet({1.0, I, -1.0, -I, 0.3 * I}));
    const auto& v = sq.extreme_points();
    double area2 = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto a = v[i], b = v[(i + 1) % v.size()];
        area2 += a.real() * b.imag() - a.imag() * b.real();
    }
    CHECK(area2 == doctest::Approx(4.0));
}

TEST_CASE("scale, conjugate, minkowski") {
    auto s = scale(PointSet({-1.0, 1.0}), 2.0);
    CHECK(s.size() == 2);
    CHECK(has_point(s.points(), 2.0));
    CHECK(has_point(s.points(), -2.0));
    CHECK(conjugate(PointSet({I})).points() == std::vector<Scalar>{-I});
    CHECK(scale(PointSet({1.0, I, 3.0}), 0.0).points() == std::vector<Scalar>{0.0});

    CHECK(minkowski_sum(PointSet({0.0, 1.0}), PointSet({0.0, 1.0})).size() == 3);
    CHECK(minkowski_sum(PointSet({Scalar(1.0, 2.0)}), PointSet({Scalar(-3.0, 0.5)})).points() ==
          std::vector<Scalar>{Scalar(-2.0, 2.5)});
    const auto m = minkowski_sum(PointSet({-1.0, 1.0}), PointSet({-1.0, 1.0}));
    CHECK(m.size() == 3);
    for (double x : {-2.0, 0.0, 2.0}) CHECK(has_point(m.points(), x));
}

TEST_CASE("diameter, modulus, containment") {
    CHECK(diameter(PointSet({-1.0, 1.0})) == 2.0);
    CHECK(max_modulus(PointSet({0.0, 1.0})) == 1.0);
    const auto sq = convex_hull(PointSet({1.0, I, -1.0, -I}));
    CHECK(contains(sq, 0.0));
    CHECK(contains(sq, 0.5 + 0.5 * I));
    CHECK_FALSE(contains(sq, 0.5 + 0.51 * I));
    const auto seg = convex_hull(PointSet({-1.0, 1.0}));
    CHECK(contains(seg, 0.25));
    CHECK_FALSE(contains(seg, 0.25 + 1e-9 * I));
    CHECK(contains(convex_hull(PointSet({I})), I));
}

TEST_CASE("disk approximation by regular polygons") {
    const auto hex = convex_hull(regular_polygon(64));
    CHECK(hex.size() == 64);
    CHECK(contains(hex, 0.99));
    CHECK_FALSE(contains(hex, 1.01));
    // nested refinements grow toward the disk
    CHECK(hull_within(convex_hull(regular_polygon(8)), convex_hull(regular_polygon(64))));
}

TEST_CASE("hull properties on random sets") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int t = 0; t < 200; ++t) {
        const auto a = random_set(rng, 1 + t % 12);
        const auto h = convex_hull(a);
        // idempotent
        CHECK(same_vertices(h, convex_hull(PointSet(h.extreme_points()))));
        // every point covered
        for (const auto& z : a.points()) CHECK(contains(h, z));
        // diameter scales by |c|
        const Scalar c(u(rng), u(rng));
        CHECK(std::abs(diameter(scale(a, c)) - std::abs(c) * diameter(a)) <= 1e-12);
        // Minkowski of hulls by edge merging equals hull of pairwise sums
        const auto b = random_set(rng, 1 + (t * 7) % 9);
        CHECK(same_vertices(convex_hull(minkowski_sum(a, b)), minkowski_sum(h, convex_hull(b)), 1e-10));
    }
}
