#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"
#include "umdlab/lp_estimator.hpp"

using namespace umdlab;

namespace {

GridField noise(int d, int N, SpaceSpec space, std::uint64_t seed, bool complex_values = true) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    GridField f(d, N, space);
    for (auto& z : f.samples) z = Scalar(g(rng), complex_values ? g(rng) : 0.0);
    return f;
}

Scalar pairing(const GridField& a, const GridField& b) {
    Scalar s{};
    for (std::size_t i = 0; i < a.samples.size(); ++i) s += std::conj(a.samples[i]) * b.samples[i];
    return s;
}

double max_diff(const GridField& a, const GridField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) m = std::max(m, std::abs(a.samples[i] - b.samples[i]));
    return m;
}

// O(N^{2d}) reference: naive DFT, multiply by m at the centred mode, naive inverse
GridField naive_apply(const LatticeTable& t, const GridField& f) {
    const int N = f.N;
    GridField out(f.d, N, f.space);
    const double w = 2.0 * std::numbers::pi / N;
    for (int k1 = -N / 2; k1 < (N + 1) / 2; ++k1)
        for (int k2 = -N / 2; k2 < (N + 1) / 2; ++k2) {
            Scalar c{};
            for (int a = 0; a < N; ++a)
                for (int b = 0; b < N; ++b) c += f.samples[a * N + b] * std::polar(1.0, -w * (k1 * a + k2 * b));
            c *= t.at(std::vector<int>{k1, k2}) / double(N * N);
            for (int a = 0; a < N; ++a)
                for (int b = 0; b < N; ++b) out.samples[a * N + b] += c * std::polar(1.0, w * (k1 * a + k2 * b));
        }
    return out;
}

std::vector<SymbolSpec> families() {
    const Scalar I(0.0, 1.0);
    return {SymbolSpec::power_quotient(2.0, {1.0, -1.0}),
            SymbolSpec::spherical_power(2, 1.3, {{{1.0, 0.0}, 1.0, 1.0}, {{0.6, 0.8}, 2.0, -1.0}}),
            SymbolSpec::banuelos_bogdan(2, {{{1.0, 2.0}, 0.5, I}}, {{{0.0, 1.0}, 1.0, -1.0}}),
            SymbolSpec::beurling_ahlfors(),
            SymbolSpec::log_quotient(2, {{{1.0, 0.0}, 1.0, 1.0}, {{0.0, 1.0}, 1.0, 0.0}}),
            SymbolSpec::shifted_power(2, 1.0, 0.5),
            SymbolSpec::kappa_quotient(0.5, 1.5, 1.0, -1.0),
            SymbolSpec::counterexample(2)};
}

double max_modulus(const LatticeTable& t) {
    double m = 0.0;
    for (const auto& v : t.values) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

TEST_CASE("grid norms") {
    const SpaceSpec l3(3, 3.0);
    GridField c(2, 8, l3);
    for (std::size_t i = 0; i < c.points(); ++i) {
        c.samples[3 * i] = 1.0;
        c.samples[3 * i + 1] = -2.0;
        c.samples[3 * i + 2] = Scalar(0.0, 2.0);
    }
    CHECK(grid_lp_norm(c, 1.7) == doctest::Approx(std::cbrt(17.0)).epsilon(1e-14));

    GridField s(2, 8, SpaceSpec::scalar());
    for (std::size_t i = 0; i < s.points(); ++i) s.samples[i] = (i * 7 % 3 == 0) ? 1.0 : -1.0;
    for (double p : {1.0, 1.5, 4.0, 11.0}) CHECK(grid_lp_norm(s, p) == doctest::Approx(1.0).epsilon(1e-14));

    const int k[] = {1, 0};
    const Scalar one[] = {1.0};
    GridField cosf = pure_mode(2, 64, SpaceSpec::scalar(), k, one);
    for (auto& z : cosf.samples) z = z.real();
    CHECK(std::abs(grid_lp_norm(cosf, 2.0) - std::sqrt(0.5)) <= 1e-10);
    CHECK_THROWS_AS(grid_lp_norm(cosf, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(GridField(2, 4, SpaceSpec::scalar(), std::vector<Scalar>(15)), std::invalid_argument);
}

TEST_CASE("bin wrap") {
    CHECK(bin_to_mode(0, 4) == 0);
    CHECK(bin_to_mode(1, 4) == 1);
    CHECK(bin_to_mode(2, 4) == -2);
    CHECK(bin_to_mode(3, 4) == -1);
    CHECK(bin_to_mode(2, 5) == 2);
    CHECK(bin_to_mode(3, 5) == -2);
    for (int N : {4, 5, 8, 9})
        for (int b = 0; b < N; ++b) CHECK(mode_to_bin(bin_to_mode(b, N), N) == b);
}

TEST_CASE("apply matches a naive transform") {
    for (int N : {5, 6}) {
        const auto t = lattice_table(SymbolSpec::banuelos_bogdan(2, {{{1.0, 2.0}, 0.5, Scalar(0.0, 1.0)}},
                                                                 {{{0.0, 1.0}, 1.0, -1.0}}),
                                     N);
        const MultiplierOperator op(t, SpaceSpec::scalar());
        const auto f = noise(2, N, SpaceSpec::scalar(), 3);
        CHECK(max_diff(op.apply(f), naive_apply(t, f)) <= 1e-12);
    }
    // Nyquist bin carries the value at -N/2
    const auto op = make_operator(SymbolSpec::shifted_power(2, 1.0, 1.0), 8);
    CHECK(op.bin_value(4 * 8 + 0) == eval(SymbolSpec::shifted_power(2, 1.0, 1.0), std::vector<double>{-4.0, 0.0}));
}

TEST_CASE("apply examples") {
    const SpaceSpec l2(2, 2.0);
    const Scalar c(0.5, -2.0);
    const auto cst = make_operator(SymbolSpec::power_quotient(1.0, {c, c}), 8, l2);
    const auto f = noise(2, 8, l2, 1);
    GridField cf = f;
    for (auto& z : cf.samples) z *= c;
    CHECK(max_diff(cst.apply(f), cf) <= 1e-12);

    const auto id = make_operator(SymbolSpec::power_quotient(2.0, {1.0, 1.0}), 8, l2);
    CHECK(max_diff(id.apply(f), f) <= 1e-12);

    const auto ba = SymbolSpec::beurling_ahlfors();
    const auto op = make_operator(ba, 8, l2);
    const Scalar x[] = {1.0, Scalar(0.0, 2.0)};
    for (auto k : {std::vector<int>{1, 2}, std::vector<int>{-4, 3}, std::vector<int>{0, -1}}) {
        const auto e = pure_mode(2, 8, l2, k, x);
        GridField me = e;
        const Scalar m = eval(ba, std::vector<double>{double(k[0]), double(k[1])});
        for (auto& z : me.samples) z *= m;
        CHECK(max_diff(op.apply(e), me) <= 1e-12);
    }

    const auto pq = make_operator(SymbolSpec::power_quotient(2.0, {1.0, -1.0}), 16);
    const int k1[] = {1, 0};
    const Scalar one[] = {1.0};
    GridField cosf = pure_mode(2, 16, SpaceSpec::scalar(), k1, one);
    for (auto& z : cosf.samples) z = z.real();
    CHECK(max_diff(pq.apply(cosf), cosf) <= 1e-12);

    // linearity
    const auto g = noise(2, 8, l2, 2);
    const Scalar a(1.5, 0.5), b(-0.25, 2.0);
    GridField comb = f;
    for (std::size_t i = 0; i < comb.samples.size(); ++i) comb.samples[i] = a * f.samples[i] + b * g.samples[i];
    const auto tf = op.apply(f), tg = op.apply(g), tc = op.apply(comb);
    double worst = 0.0;
    for (std::size_t i = 0; i < tc.samples.size(); ++i)
        worst = std::max(worst, std::abs(tc.samples[i] - a * tf.samples[i] - b * tg.samples[i]));
    CHECK(worst <= 1e-10);

    // serial reference agrees
    GridField ser(2, 8, l2);
    op.apply_serial(f.samples, ser.samples);
    CHECK(max_diff(ser, tf) == 0.0);

    CHECK_THROWS_AS(op.apply(noise(2, 16, l2, 0)), std::invalid_argument);
    CHECK_THROWS_AS(op.apply(noise(2, 8, SpaceSpec::scalar(), 0)), std::invalid_argument);
}

TEST_CASE("adjoint") {
    const SpaceSpec l3(3, 1.5);
    for (const auto& s : families()) {
        const auto op = make_operator(s, 8, l3);
        const auto adj = op.adjoint();
        const auto f = noise(2, 8, l3, 5), g = noise(2, 8, l3, 6);
        const Scalar lhs = pairing(g, op.apply(f)), rhs = pairing(adj.apply(g), f);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(lhs)));
    }
    const auto pq = make_operator(SymbolSpec::power_quotient(2.0, {1.0, -1.0}), 8);
    CHECK(pq.adjoint().table().values == pq.table().values);

    const auto ba = make_operator(SymbolSpec::beurling_ahlfors(), 8).adjoint();
    for (auto k : {std::vector<int>{1, 2}, std::vector<int>{-3, 1}}) {
        const Scalar z(k[0], k[1]);
        CHECK(std::abs(ba.table().at(k) - z / std::conj(z)) <= 1e-15);
    }
}

TEST_CASE("p = 2 estimate is the largest lattice modulus") {
    for (const auto& s : families()) {
        const auto op = make_operator(s, 16);
        LpEstimateOptions o;
        o.p = 2.0;
        o.restarts = 2;
        const auto r = norm_lower_bound(op, o);
        CHECK(std::abs(r.value - max_modulus(op.table())) <= 1e-8);
    }
    const auto id = make_operator(SymbolSpec::power_quotient(2.0, {1.0, 1.0}), 8);
    LpEstimateOptions o;
    o.p = 3.0;
    o.restarts = 2;
    CHECK(norm_lower_bound(id, o).value == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("p = 4 Riesz difference: bounded by p*-1, non-decreasing under warm starts") {
    const auto pq = SymbolSpec::power_quotient(2.0, {1.0, -1.0});
    LpEstimateOptions o;
    o.p = 4.0;
    o.restarts = 4;
    double prev = 0.0;
    GridField w;
    for (int N : {8, 16, 32}) {
        if (N > 8) o.warm_starts = {tile_upsample(w, 2)};
        const auto r = norm_lower_bound(make_operator(pq, N), o);
        CHECK(r.value > 1.0);
        CHECK(r.value <= 3.0 + 1e-6);
        CHECK(r.value >= prev);
        for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i] >= r.history[i - 1]);
        CHECK(field_ratio(make_operator(pq, N), r.witness, 4.0) == doctest::Approx(r.value).epsilon(1e-12));
        prev = r.value;
        w = r.witness;
    }
}

TEST_CASE("estimates are reproducible and thread independent") {
    const auto op = make_operator(SymbolSpec::counterexample(2), 16);
    LpEstimateOptions o;
    o.p = 4.0;
    o.restarts = 6;
    o.seed = 9;
    const auto a = norm_lower_bound(op, o);
    o.serial = true;
    const auto b = norm_lower_bound(op, o);
    CHECK(a.value == b.value);
    CHECK(a.witness.samples == b.witness.samples);
    CHECK(a.run_values == b.run_values);
    o.seed = 10;
    CHECK(norm_lower_bound(op, o).run_values != a.run_values);
}

TEST_CASE("adjoint estimate at the dual exponent") {
    const auto op = make_operator(SymbolSpec::power_quotient(1.3, {Scalar(0.3, 1.0), -1.0}), 16);
    LpEstimateOptions o;
    o.restarts = 16;
    o.p = 4.0;
    const double a = norm_lower_bound(op, o).value;
    o.p = 4.0 / 3.0;
    const double b = norm_lower_bound(op.adjoint(), o).value;
    CHECK(std::abs(a - b) <= 2e-2);
}

TEST_CASE("tiling and lifting keep the ratio") {
    const auto ce = SymbolSpec::counterexample(2);
    const auto pq = SymbolSpec::power_quotient(2.0, {1.0, -1.0});
    for (const auto& s : {ce, pq}) {
        const auto f = noise(2, 8, SpaceSpec::scalar(), 4);
        const double r8 = field_ratio(make_operator(s, 8), f, 4.0);
        const double r16 = field_ratio(make_operator(s, 16), tile_upsample(f, 2), 4.0);
        const double r24 = field_ratio(make_operator(s, 24), tile_upsample(f, 3), 4.0);
        CHECK(r16 == doctest::Approx(r8).epsilon(1e-12));
        CHECK(r24 == doctest::Approx(r8).epsilon(1e-12));
    }
    const auto t = tile_upsample(noise(1, 3, SpaceSpec::scalar(), 1), 2);
    CHECK(t.samples[0] == t.samples[3]);
    CHECK(t.samples[2] == t.samples[5]);

    // mean-zero witness on T^2 lifted to T^3 under the padded symbol
    for (const auto& s : {ce, pq}) {
        const auto f = subtract_mean(noise(2, 8, SpaceSpec(2, 3.0), 7));
        const double r2 = field_ratio(make_operator(s, 8, SpaceSpec(2, 3.0)), f, 3.0);
        const auto lifted = lift_dimension(f);
        CHECK(lifted.d == 3);
        const double r3 = field_ratio(make_operator(s.pad(3), 8, SpaceSpec(2, 3.0)), lifted, 3.0);
        CHECK(r3 == doctest::Approx(r2).epsilon(1e-12));
    }
}

TEST_CASE("counterexample grows at p = 4 and stays unimodular at p = 2") {
    const auto ce = SymbolSpec::counterexample(2);
    LpEstimateOptions o;
    o.restarts = 4;
    double prev4 = 0.0;
    GridField w;
    for (int N : {8, 16, 32}) {
        o.p = 4.0;
        o.warm_starts.clear();
        if (N > 8) o.warm_starts.push_back(tile_upsample(w, 2));
        const auto op = make_operator(ce, N);
        const auto r = norm_lower_bound(op, o);
        CHECK(r.value > prev4);
        prev4 = r.value;
        w = r.witness;
        o.p = 2.0;
        o.warm_starts.clear();
        CHECK(norm_lower_bound(op, o).value <= 1.0 + 1e-8);
    }
}

TEST_CASE("witness export") {
    const auto f = noise(2, 4, SpaceSpec(2, kInf), 11);
    std::stringstream ss;
    write_field_binary(f, ss);
    CHECK(ss.str().size() == 16 * 2 * 16);
    const auto g = read_field_binary(ss, 2, 4, SpaceSpec(2, kInf));
    CHECK(g.samples == f.samples);
    const auto h = nlohmann::json::parse(field_header_json(f, 1.25, 4.0));
    CHECK(h["space"]["q"] == "inf");
    CHECK(h["ratio"] == 1.25);
    std::stringstream shortfile("abc");
    CHECK_THROWS(read_field_binary(shortfile, 2, 4, SpaceSpec::scalar()));
}
