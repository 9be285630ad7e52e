#include "doctest.h"

#include <cmath>
#include <random>

#include "umdlab/spaces.hpp"

using namespace umdlab;

namespace {

Vec random_vec(std::mt19937_64& rng, const SpaceSpec& s, bool complex_entries = true) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Scalar> e(static_cast<std::size_t>(s.dim()));
    for (auto& x : e) x = Scalar(u(rng), complex_entries ? u(rng) : 0.0);
    return Vec(s, e);
}

const double kExponents[] = {1.0, 1.5, 2.0, 3.0, 7.0, kInf};

}  // namespace

TEST_CASE("norm examples") {
    CHECK(norm(Vec(SpaceSpec(2, 2.0), {3.0, 4.0})) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(norm(Vec(SpaceSpec(3, 1.0), {1.0, 1.0, 1.0})) == doctest::Approx(3.0));
    CHECK(norm(Vec(SpaceSpec(2, kInf), {1.0, -1.0})) == 1.0);
    CHECK(norm(Vec(SpaceSpec(2, 2.0))) == 0.0);
    // modulus taken per coordinate
    CHECK(norm(Vec(SpaceSpec(1, 3.0), {Scalar(0.0, -2.0)})) == 2.0);
}

TEST_CASE("dual exponents") {
    CHECK(dual_exponent(2.0) == 2.0);
    CHECK(dual_exponent(4.0) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(dual_exponent(kInf) == 1.0);
    CHECK(dual_exponent(1.0) == kInf);
    CHECK_THROWS_AS(dual_exponent(0.5), std::invalid_argument);
    for (double q : {1.25, 3.0, 10.0}) CHECK(1.0 / q + 1.0 / dual_exponent(q) == doctest::Approx(1.0));
}

TEST_CASE("space validation") {
    CHECK_THROWS_AS(SpaceSpec(0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(SpaceSpec(2, 0.9), std::invalid_argument);
    CHECK_THROWS_AS(Vec(SpaceSpec(2, 2.0), {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Vec(SpaceSpec(1, 2.0), {std::nan("")}), std::invalid_argument);
}

TEST_CASE("subgradient examples") {
    const SpaceSpec e2(3, 2.0);
    const Vec v(e2, {Scalar(1.0, 2.0), -0.5, Scalar(0.0, 3.0)});
    const auto g = norm_pow_subgradient(v, 2.0);
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(g[j] - 2.0 * v[j]) < 1e-14);

    for (double q : kExponents) {
        const auto z = norm_pow_subgradient(Vec(SpaceSpec(4, q)), 3.0);
        for (std::size_t j = 0; j < 4; ++j) CHECK(z[j] == Scalar{});
    }

    const auto g4 = norm_pow_subgradient(Vec(SpaceSpec(2, 2.0), {1.0, 0.0}), 4.0);
    CHECK(std::abs(g4[0] - 4.0) < 1e-14);
    CHECK(g4[1] == Scalar{});
}

TEST_CASE("sup-norm subgradient sits on the lowest maximizing index") {
    const Vec v(SpaceSpec(4, kInf), {0.5, Scalar(0.0, -2.0), 2.0, -1.0});
    const auto g = norm_pow_subgradient(v, 3.0);
    CHECK(g[0] == Scalar{});
    CHECK(std::abs(g[1] - Scalar(0.0, -12.0)) < 1e-12);  // 3 * 2^2 * (-i)
    CHECK(g[2] == Scalar{});
    CHECK(g[3] == Scalar{});
}

TEST_CASE("norm axioms on random inputs") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (double q : kExponents) {
        const SpaceSpec s(5, q);
        for (int t = 0; t < 200; ++t) {
            const Vec a = random_vec(rng, s), b = random_vec(rng, s);
            CHECK(norm(a + b) <= norm(a) + norm(b) + 1e-12);
            const Scalar c(u(rng), u(rng));
            CHECK(std::abs(norm(a * c) - std::abs(c) * norm(a)) <= 1e-12 * (1.0 + norm(a)));
        }
    }
}

TEST_CASE("Holder duality pairing") {
    std::mt19937_64 rng(11);
    for (double q : kExponents) {
        const SpaceSpec s(6, q);
        for (int t = 0; t < 200; ++t) {
            const Vec a = random_vec(rng, s), b = random_vec(rng, s.dual());
            CHECK(real_pairing(a, b) <= norm(a) * norm(b) + 1e-12);
        }
    }
}

TEST_CASE("subgradient matches centered finite differences") {
    std::mt19937_64 rng(3);
    // q = 1 and q = inf are only subdifferentiable; random points are smooth a.s.
    for (double q : kExponents) {
        for (double p : {1.5, 2.0, 4.0}) {
            const SpaceSpec s(4, q);
            for (int t = 0; t < 20; ++t) {
                const Vec v = random_vec(rng, s), h = random_vec(rng, s);
                const double d = real_pairing(norm_pow_subgradient(v, p), h);
                auto fd = [&](double step) {
                    const double up = std::pow(norm(v + h * Scalar(step)), p);
                    const double dn = std::pow(norm(v - h * Scalar(step)), p);
                    return (up - dn) / (2.0 * step);
                };
                const double e4 = std::abs(fd(1e-4) - d);
                const double e5 = std::abs(fd(1e-5) - d);
                // o(t): error small and shrinking (or already at round-off)
                CHECK(e5 <= 1e-5 * (1.0 + std::abs(d)));
                CHECK((e5 <= 0.5 * e4 || e5 <= 1e-8 * (1.0 + std::abs(d))));
            }
        }
    }
}
