#include "umdlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "umdlab/bellman.hpp"
#include "umdlab/lp_estimator.hpp"
#include "umdlab/power_method.hpp"
#include "umdlab/symbol_sets.hpp"

namespace umdlab {

using json = nlohmann::json;

namespace {

std::atomic<bool> g_timing{true};

struct Stopwatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double ms() const {
        if (!g_timing.load()) return 0.0;
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
};

json scalar_json(Scalar z) {
    if (z.imag() == 0.0) return z.real();
    return json::array({z.real(), z.imag()});
}

Scalar scalar_from(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    throw std::invalid_argument("expected a number or [re, im], got " + j.dump());
}

ReportRow make_row(const ExperimentConfig& c, std::string quantity, std::string method, double value,
                   const json& params, double ms) {
    return {c.id, std::move(quantity), std::move(method), value, params.dump(), ms};
}

ReportRow verdict(const ExperimentConfig& c, const std::string& name, bool pass, const json& params = json::object()) {
    return make_row(c, kVerdictPrefix + name, "analytic", pass ? 1.0 : 0.0, params, 0.0);
}

template <class F>
auto guarded(const ExperimentConfig& c, const std::string& where, F&& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        throw std::runtime_error("experiment '" + c.id + "' (" + where + "): " + e.what());
    }
}

bool hilbert_like(const SpaceSpec& s) { return s.dim() == 1 || s.exponent() == 2.0; }

double max_abs(const std::vector<Scalar>& A) {
    double m = 0.0;
    for (const auto& a : A) m = std::max(m, std::abs(a));
    return m;
}

bool all_real(const std::vector<Scalar>& A) {
    return std::all_of(A.begin(), A.end(), [](Scalar a) { return a.imag() == 0.0; });
}

MartingaleTree random_tree(std::mt19937_64& rng, const SpaceSpec& space, int depth, bool complex_values) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Scalar> s((std::size_t{1} << depth) * static_cast<std::size_t>(space.dim()));
    for (auto& x : s) x = Scalar(u(rng), complex_values ? u(rng) : 0.0);
    return MartingaleTree(space, depth, s);
}

CoefficientPlan random_plan(std::mt19937_64& rng, int depth, PlanMode mode, const std::vector<Scalar>& choices) {
    std::uniform_int_distribution<std::size_t> pick(0, choices.size() - 1);
    const std::size_t n = mode == PlanMode::Level ? static_cast<std::size_t>(depth) + 1 : std::size_t{1} << depth;
    std::vector<Scalar> c(n);
    for (auto& x : c) x = choices[pick(rng)];
    return mode == PlanMode::Level ? CoefficientPlan::level(c) : CoefficientPlan::adapted(depth, c);
}

std::vector<Scalar> power_quotient_coefficients(const std::vector<Scalar>& A, int d) {
    std::vector<Scalar> a(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) a[j] = A[static_cast<std::size_t>(j) % A.size()];
    return a;
}

std::filesystem::path witness_dir(const ExperimentConfig& c) {
    auto dir = std::filesystem::path(c.output_dir) / "witnesses";
    std::filesystem::create_directories(dir);
    return dir;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
    std::ofstream os(file);
    if (!os) throw std::runtime_error("cannot write " + file.string());
    os << text;
}

// Frozen-value checks; a reference with no matching row fails.
void check_references(const ExperimentConfig& c, Report& r) {
    const std::size_t n = r.rows.size();
    for (const auto& ref : c.references) {
        bool matched = false, pass = true;
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& row = r.rows[i];
            if (row.quantity != ref.quantity) continue;
            const json params = json::parse(row.params_json);
            bool subset = true;
            for (const auto& [k, v] : ref.params.items()) subset = subset && params.contains(k) && params[k] == v;
            if (!subset) continue;
            matched = true;
            const double err = std::abs(row.value - ref.value);
            worst = std::max(worst, err);
            pass = pass && err <= ref.tol;
        }
        json p = ref.params;
        p["reference"] = ref.value;
        p["tol"] = ref.tol;
        p["worst_error"] = worst;
        r.rows.push_back(verdict(c, "reference:" + ref.quantity, matched && pass, p));
    }
}

// ---------------------------------------------------------------- quadrature oracle

// composite 5-point Gauss-Legendre mean over alpha in (u, v] of the two-term power quotient
Scalar kappa_quadrature(double u, double v, Scalar a1, Scalar a2, double x1, double x2) {
    static const double xs[] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640, 0.9061798459386640};
    static const double ws[] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                                0.2369268850561891};
    const int panels = 200;
    const double h = (v - u) / panels;
    Scalar s{};
    for (int k = 0; k < panels; ++k) {
        const double mid = u + (k + 0.5) * h;
        for (int q = 0; q < 5; ++q) {
            const double a = mid + 0.5 * h * xs[q];
            const double w1 = std::pow(std::abs(x1), a), w2 = std::pow(std::abs(x2), a);
            s += 0.5 * h * ws[q] * (a1 * w1 + a2 * w2) / (w1 + w2);
        }
    }
    return s / (v - u);
}

// ---------------------------------------------------------------- properties

using Property = std::function<Report(const ExperimentConfig&)>;

Report prop_symbol_sets(const ExperimentConfig& c) {
    Stopwatch sw;
    std::mt19937_64 rng(mix_seed(c.seed, 101));
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_int_distribution<int> size(1, 12);
    auto random_set = [&] {
        std::vector<Scalar> v(static_cast<std::size_t>(size(rng)));
        for (auto& z : v) z = Scalar(u(rng), u(rng));
        return PointSet(v);
    };
    bool idem = true, contained = true, mink = true;
    double diam_err = 0.0;
    const int n = 500;
    for (int t = 0; t < n; ++t) {
        const auto A = random_set(), B = random_set();
        const auto h = convex_hull(A);
        idem = idem && same_vertices(convex_hull(PointSet(h.extreme_points())), h);
        for (const auto& z : A.points()) contained = contained && contains(h, z);
        const Scalar a(u(rng), u(rng));
        diam_err = std::max(diam_err, std::abs(diameter(scale(A, a)) - std::abs(a) * diameter(A)) /
                                          (1.0 + std::abs(a) * diameter(A)));
        mink = mink && same_vertices(convex_hull(minkowski_sum(A, B)), minkowski_sum(h, convex_hull(B)), 1e-9);
    }
    Report r;
    const json p{{"instances", n}};
    r.rows.push_back(make_row(c, "diameter_scaling_error", "analytic", diam_err, p, sw.ms()));
    r.rows.push_back(verdict(c, "hull_idempotent", idem, p));
    r.rows.push_back(verdict(c, "points_in_hull", contained, p));
    r.rows.push_back(verdict(c, "diameter_scaling", diam_err <= 1e-12, p));
    r.rows.push_back(verdict(c, "minkowski_hull", mink, p));
    return r;
}

Report prop_singleton(const ExperimentConfig& c) {
    Stopwatch sw;
    double worst = 0.0;
    int n = 0;
    for (Scalar a : {Scalar(0.5), Scalar(-2.0), Scalar(0.6, 0.8), Scalar(0.0, 3.0)})
        for (double p : {1.5, c.p, 4.0}) {
            const auto e = optimize_tree(convex_hull(PointSet({a})), p, 3, c.space, 2, mix_seed(c.seed, 201 + n++));
            worst = std::max(worst, std::abs(e.value - std::abs(a)));
        }
    Report r;
    r.rows.push_back(make_row(c, "singleton_error", "martingale", worst, {{"cases", n}}, sw.ms()));
    r.rows.push_back(verdict(c, "singleton", worst <= 1e-9, {{"tol", 1e-9}}));
    return r;
}

Report prop_scaling(const ExperimentConfig& c) {
    Stopwatch sw;
    std::mt19937_64 rng(mix_seed(c.seed, 301));
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    double worst = 0.0;
    const int n = 1000;
    for (int t = 0; t < n; ++t) {
        const int depth = 1 + t % 5;
        const auto f = random_tree(rng, c.space, depth, true);
        std::vector<Scalar> choices{Scalar(u(rng), u(rng)), Scalar(u(rng), u(rng)), Scalar(u(rng), u(rng))};
        const auto plan = random_plan(rng, depth, t % 2 ? PlanMode::Level : PlanMode::Adapted, choices);
        const Scalar a(u(rng), u(rng));
        const double base = ratio(f, plan, c.p);
        const double scaled = ratio(f, plan.scaled(a), c.p);
        worst = std::max(worst, std::abs(scaled - std::abs(a) * base) / std::max(1e-300, std::abs(a) * base));
    }
    Report r;
    r.rows.push_back(make_row(c, "scaling_relative_error", "martingale", worst, {{"instances", n}}, sw.ms()));
    r.rows.push_back(verdict(c, "scaling", worst <= 1e-12, {{"tol", 1e-12}}));
    return r;
}

// every nonzero tree with slot values in {-1, 0, 1}
template <class F>
void for_each_grid_tree(int depth, F&& f) {
    const std::size_t slots = std::size_t{1} << depth;
    std::vector<int> idx(slots, 0);
    std::vector<Scalar> vals(slots);
    while (true) {
        std::size_t s = 0;
        while (s < slots && ++idx[s] == 3) idx[s++] = 0;
        if (s == slots) break;
        for (std::size_t k = 0; k < slots; ++k) vals[k] = static_cast<double>(idx[k] - 1);
        bool zero = std::all_of(vals.begin(), vals.end(), [](Scalar z) { return z == Scalar{}; });
        if (!zero) f(MartingaleTree(SpaceSpec::scalar(), depth, vals));
    }
}

int max_brute_depth(const ExperimentConfig& c) {
    int d = 3;
    if (!c.depths.empty()) d = std::min(d, *std::max_element(c.depths.begin(), c.depths.end()));
    return std::max(d, 1);
}

double enumerated_max(const MartingaleTree& f, const ConvexRegion& hull, PlanMode mode, double p) {
    return ratio(f, optimize_coefficients(f, hull, mode, p, std::uint64_t{1} << 22), p);
}

Report prop_hull_monotonicity(const ExperimentConfig& c) {
    const Scalar I(0.0, 1.0);
    const std::vector<std::pair<std::vector<Scalar>, std::vector<Scalar>>> pairs = {
        {{0.0, 1.0}, {-1.0, 1.0}},
        {{0.5}, {0.0, 1.0}},
        {{-1.0, 1.0}, {-1.0, 1.0, I}},
        {{0.5, 0.5 * I}, {1.0, I, -1.0, -I}},
    };
    Report r;
    const int top = max_brute_depth(c);
    bool all = true;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        Stopwatch sw;
        const auto h1 = convex_hull(PointSet(pairs[k].first)), h2 = convex_hull(PointSet(pairs[k].second));
        if (!hull_within(h1, h2)) throw std::logic_error("hull pair is not nested");
        double worst = -kInf;
        long trees = 0;
        for (int depth = 1; depth <= top; ++depth)
            for_each_grid_tree(depth, [&](const MartingaleTree& f) {
                ++trees;
                worst = std::max(worst, enumerated_max(f, h1, PlanMode::Level, c.p) -
                                            enumerated_max(f, h2, PlanMode::Level, c.p));
            });
        const json p{{"pair", k}, {"max_depth", top}, {"trees", trees}, {"p", c.p}};
        r.rows.push_back(make_row(c, "hull_monotonicity_worst_gap", "martingale", worst, p, sw.ms()));
        all = all && worst <= 0.0;
    }
    r.rows.push_back(verdict(c, "hull_monotonicity", all));
    return r;
}

Report prop_adapted_vs_level(const ExperimentConfig& c) {
    Report r;
    const int top = max_brute_depth(c);
    bool all = true;
    for (const auto& A : {std::vector<Scalar>{-1.0, 1.0}, std::vector<Scalar>{0.0, 1.0}}) {
        Stopwatch sw;
        const auto h = convex_hull(PointSet(A));
        double worst = kInf;
        long trees = 0;
        for (int depth = 1; depth <= top; ++depth)
            for_each_grid_tree(depth, [&](const MartingaleTree& f) {
                ++trees;
                worst = std::min(worst, enumerated_max(f, h, PlanMode::Adapted, c.p) -
                                            enumerated_max(f, h, PlanMode::Level, c.p));
            });
        const json p{{"A", json::array({scalar_json(A[0]), scalar_json(A[1])})}, {"max_depth", top}, {"trees", trees}};
        r.rows.push_back(make_row(c, "adapted_minus_level_min", "martingale", worst, p, sw.ms()));
        all = all && worst >= 0.0;
    }
    r.rows.push_back(verdict(c, "adapted_ge_level", all));
    return r;
}

Report prop_extreme_points(const ExperimentConfig& c) {
    Stopwatch sw;
    const Scalar I(0.0, 1.0);
    std::mt19937_64 rng(mix_seed(c.seed, 401));
    double worst = 0.0;
    int cases = 0;
    for (const auto& A : {std::vector<Scalar>{-1.0, 1.0, I}, std::vector<Scalar>{0.0, 1.0}}) {
        const auto hull = convex_hull(PointSet(A));
        // barycentric grid of step 1/8 over the hull vertices
        std::vector<Scalar> grid;
        const auto& e = hull.extreme_points();
        const int m = 8;
        if (e.size() == 2) {
            for (int i = 0; i <= 4 * m; ++i) grid.push_back(e[0] + (e[1] - e[0]) * (double(i) / (4 * m)));
        } else {
            for (int i = 0; i <= m; ++i)
                for (int j = 0; i + j <= m; ++j)
                    grid.push_back((double(i) * e[0] + double(j) * e[1] + double(m - i - j) * e[2]) / double(m));
        }
        for (int depth = 1; depth <= 2; ++depth)
            for (int t = 0; t < 5; ++t) {
                const auto f = random_tree(rng, SpaceSpec::scalar(), depth, true);
                const double ext = enumerated_max(f, hull, PlanMode::Level, c.p);
                const std::size_t slots = static_cast<std::size_t>(depth) + 1;
                std::vector<std::size_t> idx(slots, 0);
                std::vector<Scalar> coeff(slots);
                double dense = 0.0;
                while (true) {
                    for (std::size_t s = 0; s < slots; ++s) coeff[s] = grid[idx[s]];
                    dense = std::max(dense, ratio(f, CoefficientPlan::level(coeff), c.p));
                    std::size_t s = 0;
                    while (s < slots && ++idx[s] == grid.size()) idx[s++] = 0;
                    if (s == slots) break;
                }
                worst = std::max(worst, std::abs(dense - ext));
                ++cases;
            }
    }
    Report r;
    r.rows.push_back(make_row(c, "dense_minus_extreme", "martingale", worst, {{"cases", cases}}, sw.ms()));
    r.rows.push_back(verdict(c, "extreme_point_sufficiency", worst <= 1e-6, {{"tol", 1e-6}}));
    return r;
}

Report prop_minkowski(const ExperimentConfig& c) {
    Stopwatch sw;
    const Scalar I(0.0, 1.0);
    const std::vector<Scalar> A1{-1.0, 1.0}, A2{0.0, 0.5 * I};
    std::mt19937_64 rng(mix_seed(c.seed, 501));
    std::uniform_int_distribution<int> pick(0, 1);
    double worst = -kInf;
    const int n = 300;
    for (int t = 0; t < n; ++t) {
        const int depth = 1 + t % 3;
        const auto mode = t % 2 ? PlanMode::Level : PlanMode::Adapted;
        const auto f = random_tree(rng, c.space, depth, true);
        const std::size_t slots = mode == PlanMode::Level ? static_cast<std::size_t>(depth) + 1 : std::size_t{1} << depth;
        std::vector<Scalar> s(slots), s1(slots), s2(slots);
        for (std::size_t k = 0; k < slots; ++k) {
            s1[k] = A1[pick(rng)];
            s2[k] = A2[pick(rng)];
            s[k] = s1[k] + s2[k];
        }
        auto mk = [&](std::vector<Scalar> v) {
            return mode == PlanMode::Level ? CoefficientPlan::level(std::move(v)) : CoefficientPlan::adapted(depth, std::move(v));
        };
        worst = std::max(worst, ratio(f, mk(s), c.p) - ratio(f, mk(s1), c.p) - ratio(f, mk(s2), c.p));
    }
    // enumerated maxima over the sum set
    const auto hs = convex_hull(minkowski_sum(PointSet(A1), PointSet(A2)));
    const auto h1 = convex_hull(PointSet(A1)), h2 = convex_hull(PointSet(A2));
    for (int t = 0; t < 40; ++t) {
        const auto f = random_tree(rng, SpaceSpec::scalar(), 1 + t % 2, true);
        worst = std::max(worst, enumerated_max(f, hs, PlanMode::Level, c.p) - enumerated_max(f, h1, PlanMode::Level, c.p) -
                                    enumerated_max(f, h2, PlanMode::Level, c.p));
    }
    Report r;
    r.rows.push_back(make_row(c, "subadditivity_worst_excess", "martingale", worst, {{"instances", n + 40}}, sw.ms()));
    r.rows.push_back(verdict(c, "minkowski_subadditivity", worst <= 1e-12, {{"tol", 1e-12}}));
    return r;
}

Report prop_p2_closed_form(const ExperimentConfig& c) {
    Stopwatch sw;
    std::vector<std::vector<Scalar>> sets{{-1.0, 1.0}, {0.0, 1.0}, {0.25, Scalar(0.0, -0.7)}, {2.0}, c.A};
    double worst = 0.0;
    for (std::size_t k = 0; k < sets.size(); ++k) {
        const auto e = optimize_tree(convex_hull(PointSet(sets[k])), 2.0, 4, SpaceSpec::scalar(), 4,
                                     mix_seed(c.seed, 601 + k));
        worst = std::max(worst, std::abs(e.value - max_abs(sets[k])));
    }
    Report r;
    r.rows.push_back(make_row(c, "p2_closed_form_error", "martingale", worst, {{"sets", sets.size()}}, sw.ms()));
    r.rows.push_back(verdict(c, "p2_closed_form", worst <= 1e-6, {{"tol", 1e-6}}));
    return r;
}

Report prop_reproducibility(const ExperimentConfig& c) {
    Stopwatch sw;
    const auto hull = convex_hull(PointSet(c.A));
    const auto a = optimize_tree(hull, c.p, 4, c.space, 3, c.seed);
    const auto b = optimize_tree(hull, c.p, 4, c.space, 3, c.seed);
    const bool same = a.value == b.value && std::equal(a.witness_tree.slots().begin(), a.witness_tree.slots().end(),
                                                       b.witness_tree.slots().begin()) &&
                      a.witness_plan.coefficients() == b.witness_plan.coefficients();
    Report r;
    r.rows.push_back(make_row(c, "beta_lower", "martingale", a.value, {{"depth", 4}, {"restarts", 3}}, sw.ms()));
    r.rows.push_back(verdict(c, "reproducible", same));
    return r;
}

Report prop_lifting(const ExperimentConfig& c) {
    Stopwatch sw;
    std::mt19937_64 rng(mix_seed(c.seed, 701));
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    double worst = kInf;
    const int n = 1000;
    for (int t = 0; t < n; ++t) {
        const int depth = 1 + t % 5;
        const auto f = random_tree(rng, c.space, depth, true);
        const auto sp = random_plan(rng, depth, t % 2 ? PlanMode::Level : PlanMode::Adapted, {1.0, -1.0});
        const Scalar a1(u(rng), u(rng)), a2(u(rng), u(rng));
        const auto [l1, l2] = lift_witness(sp, a1, a2);
        const double lhs = 0.5 * std::abs(a1 - a2) * terminal_pnorm(apply_transform(f, sp), c.p);
        const double rhs =
            std::max(terminal_pnorm(apply_transform(f, l1), c.p), terminal_pnorm(apply_transform(f, l2), c.p));
        worst = std::min(worst, rhs - lhs);
    }
    Report r;
    r.rows.push_back(make_row(c, "lifting_min_slack", "martingale", worst, {{"instances", n}}, sw.ms()));
    r.rows.push_back(verdict(c, "lifting", worst >= -1e-12, {{"tol", 1e-12}}));
    return r;
}

Report prop_finite_duality(const ExperimentConfig& c) {
    Stopwatch sw;
    std::mt19937_64 rng(mix_seed(c.seed, 801));
    double worst = 0.0;
    bool agree = true;
    int cases = 0;
    for (int depth = 1; depth <= max_brute_depth(c); ++depth)
        for (int t = 0; t < 3; ++t) {
            const auto plan = t < 2 ? random_plan(rng, depth, PlanMode::Adapted, {1.0, -1.0})
                                    : random_plan(rng, depth, PlanMode::Level, c.A);
            const auto chk = adjoint_pnorm_check(finite_transform_matrix(depth, plan), c.p, 32, mix_seed(c.seed, cases));
            worst = std::max(worst, std::abs(chk.norm_p - chk.norm_dual));
            agree = agree && chk.agree;
            ++cases;
        }
    Report r;
    r.rows.push_back(make_row(c, "finite_duality_gap", "martingale", worst, {{"cases", cases}, {"p", c.p}}, sw.ms()));
    r.rows.push_back(verdict(c, "finite_duality", agree && worst <= 1e-4, {{"tol", 1e-4}}));
    return r;
}

std::vector<int> fft_resolutions(const ExperimentConfig& c, std::vector<int> fallback) {
    return c.resolutions.empty() ? fallback : c.resolutions;
}

Report prop_p2_exactness(const ExperimentConfig& c) {
    Report r;
    bool all = true;
    for (const auto& [name, spec] : shipped_symbols())
        for (int N : fft_resolutions(c, {16, 64})) {
            Stopwatch sw;
            const auto op = make_operator(spec, N);
            LpEstimateOptions o;
            o.p = 2.0;
            o.restarts = c.restarts;
            o.seed = c.seed;
            const double v = guarded(c, name, [&] { return norm_lower_bound(op, o).value; });
            double mx = 0.0;
            for (const auto& z : op.table().values) mx = std::max(mx, std::abs(z));
            const double err = std::abs(v - mx);
            r.rows.push_back(make_row(c, "p2_lattice_gap", "fft", err, {{"symbol", name}, {"N", N}}, sw.ms()));
            all = all && err <= 1e-8;
        }
    r.rows.push_back(verdict(c, "p2_exactness", all, {{"tol", 1e-8}}));
    return r;
}

Report prop_fft_duality(const ExperimentConfig& c) {
    const Scalar I(0.0, 1.0);
    const std::vector<std::pair<std::string, SymbolSpec>> ops = {
        {"PowerQuotient", SymbolSpec::power_quotient(1.3, {Scalar(0.3, 1.0), -1.0})},
        {"BeurlingAhlfors", SymbolSpec::beurling_ahlfors()},
        {"SphericalPower", SymbolSpec::spherical_power(2, 1.5, {{{1.0, 0.0}, 1.0, 1.0}, {{0.6, 0.8}, 1.0, I}})},
    };
    const int N = fft_resolutions(c, {16}).front();
    const double pd = dual_exponent(c.p);
    Report r;
    bool all = true;
    for (const auto& [name, spec] : ops) {
        Stopwatch sw;
        const auto op = make_operator(spec, N);
        LpEstimateOptions o;
        o.restarts = c.restarts;
        o.seed = c.seed;
        o.p = c.p;
        const double a = norm_lower_bound(op, o).value;
        o.p = pd;
        const double b = norm_lower_bound(op.adjoint(), o).value;
        const json p{{"symbol", name}, {"N", N}, {"p", c.p}};
        r.rows.push_back(make_row(c, "fft_lower", "fft", a, p, sw.ms()));
        json pa = p;
        pa["p"] = pd;
        pa["adjoint"] = true;
        r.rows.push_back(make_row(c, "fft_lower", "fft", b, pa, 0.0));
        all = all && std::abs(a - b) <= 2e-2;
    }
    r.rows.push_back(verdict(c, "fft_duality", all, {{"tol", 2e-2}}));
    return r;
}

Report prop_bellman_fixed_point(const ExperimentConfig& c) {
    const int M = c.resolutions.empty() ? 201 : c.resolutions.front();
    Report r;
    Stopwatch sw;
    BellmanGrid g({2.0, -1.0, 1.0, 1.0, c.half_width, M});
    initial_surface(g);
    const auto fixed = iterate(g);
    const json p1{{"p", 2}, {"beta", 1.0}, {"M", M}, {"L", c.half_width}, {"status", to_string(fixed.status)},
                  {"iterations", fixed.iterations}};
    r.rows.push_back(make_row(c, "sup_change", "bellman", fixed.last_change, p1, sw.ms()));
    r.rows.push_back(verdict(c, "fixed_point_beta_1", fixed.status == BellmanStatus::Converged &&
                                                          fixed.iterations == 1 && fixed.last_change < 1e-10,
                             p1));
    Stopwatch sw2;
    BellmanGrid h({2.0, -1.0, 1.0, 0.9, c.half_width, M});
    initial_surface(h);
    IterateOptions o;
    o.max_iter = 50;
    const auto div = iterate(h, o);
    const json p2{{"p", 2}, {"beta", 0.9}, {"M", M}, {"L", c.half_width}, {"status", to_string(div.status)},
                  {"iterations", div.iterations}};
    r.rows.push_back(make_row(c, "origin_value", "bellman", div.origin_value, p2, sw2.ms()));
    r.rows.push_back(verdict(c, "diverges_beta_0.9", div.status == BellmanStatus::Diverged, p2));
    return r;
}

Report prop_bb_reduction(const ExperimentConfig& c) {
    Stopwatch sw;
    std::mt19937_64 rng(mix_seed(c.seed, 901));
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst = 0.0;
    const int n = 1000;
    for (int t = 0; t < n; ++t) {
        const int d = 2 + t % 3;
        std::vector<Scalar> a(static_cast<std::size_t>(d));
        std::vector<SphereAtom> atoms;
        for (int j = 0; j < d; ++j) {
            a[j] = Scalar(u(rng), u(rng));
            std::vector<double> e(static_cast<std::size_t>(d), 0.0);
            e[j] = 1.0;
            atoms.push_back({e, 1.0, a[j]});
        }
        std::vector<double> xi(static_cast<std::size_t>(d));
        for (auto& x : xi) x = g(rng);
        const Scalar bb = eval(SymbolSpec::banuelos_bogdan(d, {}, atoms), xi);
        const Scalar pq = eval(SymbolSpec::power_quotient(2.0, a), xi);
        worst = std::max(worst, std::abs(bb - pq));
    }
    Report r;
    r.rows.push_back(make_row(c, "bb_reduction_error", "analytic", worst, {{"points", n}}, sw.ms()));
    r.rows.push_back(verdict(c, "bb_reduction", worst <= 1e-12, {{"tol", 1e-12}}));
    return r;
}

Report prop_kappa_quadrature(const ExperimentConfig& c) {
    Stopwatch sw;
    std::mt19937_64 rng(mix_seed(c.seed, 1001));
    std::uniform_real_distribution<double> uu(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst = 0.0;
    const int n = 100;
    for (int t = 0; t < n; ++t) {
        const double u = 1.5 * uu(rng), v = u + (2.0 - u) * (0.05 + 0.95 * uu(rng));
        const Scalar a1(uu(rng), uu(rng)), a2(-uu(rng), 2.0 * uu(rng));
        double x1 = g(rng), x2 = g(rng);
        if (t % 10 == 0) x2 = x1 * (1.0 + 1e-6);
        const Scalar m = eval(SymbolSpec::kappa_quotient(u, v, a1, a2), std::vector<double>{x1, x2});
        worst = std::max(worst, std::abs(m - kappa_quadrature(u, v, a1, a2, x1, x2)));
    }
    Report r;
    r.rows.push_back(make_row(c, "kappa_quadrature_error", "analytic", worst, {{"points", n}}, sw.ms()));
    r.rows.push_back(verdict(c, "kappa_quadrature", worst <= 1e-6, {{"tol", 1e-6}}));
    return r;
}

const std::vector<std::pair<std::string, Property>>& registry() {
    static const std::vector<std::pair<std::string, Property>> r = {
        {"symbol_sets", prop_symbol_sets},
        {"singleton", prop_singleton},
        {"scaling", prop_scaling},
        {"hull_monotonicity", prop_hull_monotonicity},
        {"adapted_vs_level", prop_adapted_vs_level},
        {"extreme_point_sufficiency", prop_extreme_points},
        {"minkowski_subadditivity", prop_minkowski},
        {"p2_closed_form", prop_p2_closed_form},
        {"reproducibility", prop_reproducibility},
        {"lifting", prop_lifting},
        {"finite_duality", prop_finite_duality},
        {"p2_exactness", prop_p2_exactness},
        {"fft_duality", prop_fft_duality},
        {"bellman_fixed_point", prop_bellman_fixed_point},
        {"bb_reduction", prop_bb_reduction},
        {"kappa_quadrature", prop_kappa_quadrature},
    };
    return r;
}

}  // namespace

// ---------------------------------------------------------------- config

const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::IdentityCheck: return "IdentityCheck";
        case ExperimentKind::BellmanSweep: return "BellmanSweep";
        case ExperimentKind::CounterexampleSweep: return "CounterexampleSweep";
        case ExperimentKind::PropertySuite: return "PropertySuite";
    }
    return "?";
}

ExperimentKind kind_from_string(const std::string& s) {
    for (auto k : {ExperimentKind::IdentityCheck, ExperimentKind::BellmanSweep, ExperimentKind::CounterexampleSweep,
                   ExperimentKind::PropertySuite})
        if (s == to_string(k)) return k;
    throw std::invalid_argument("unknown experiment kind '" + s + "'");
}

json space_json(const SpaceSpec& s) {
    return {{"dim", s.dim()}, {"q", s.is_sup() ? json("inf") : json(s.exponent())}};
}

SpaceSpec space_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("space must be an object {dim, q}");
    const int dim = j.value("dim", 1);
    double q = 2.0;
    if (j.contains("q")) {
        if (j["q"].is_string()) {
            if (j["q"] != "inf") throw std::invalid_argument("space q must be a number or \"inf\"");
            q = kInf;
        } else {
            q = j["q"].get<double>();
        }
    }
    return SpaceSpec(dim, q);
}

json ExperimentConfig::to_json() const {
    json a = json::array();
    for (const auto& z : A) a.push_back(scalar_json(z));
    json refs = json::array();
    for (const auto& r : references)
        refs.push_back({{"quantity", r.quantity}, {"params", r.params}, {"value", r.value}, {"tol", r.tol}});
    json j{{"id", id},
           {"kind", umdlab::to_string(kind)},
           {"A", a},
           {"p", p},
           {"d", d},
           {"alpha", alpha},
           {"depths", depths},
           {"resolutions", resolutions},
           {"restarts", restarts},
           {"seed", seed},
           {"space", space_json(space)},
           {"half_width", half_width},
           {"bisection_width", bisection_width},
           {"properties", properties},
           {"references", refs}};
    j["output"] = {{"dir", output_dir}, {"format", format}};
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    static const std::set<std::string> known = {"id", "kind", "A", "p", "d", "alpha", "depths", "resolutions",
                                                "restarts", "seed", "space", "half_width", "bisection_width",
                                                "properties", "references", "output", "description"};
    if (!j.is_object()) throw std::invalid_argument("experiment config must be a JSON object");
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) throw std::invalid_argument("unknown config key '" + k + "'");
    ExperimentConfig c;
    try {
        c.id = j.value("id", c.id);
        if (!j.contains("kind")) throw std::invalid_argument("config needs a kind");
        c.kind = kind_from_string(j["kind"].get<std::string>());
        if (j.contains("A")) {
            c.A.clear();
            for (const auto& z : j["A"]) c.A.push_back(scalar_from(z));
        }
        c.p = j.value("p", c.p);
        c.d = j.value("d", c.d);
        c.alpha = j.value("alpha", c.alpha);
        c.depths = j.value("depths", c.depths);
        c.resolutions = j.value("resolutions", c.resolutions);
        c.restarts = j.value("restarts", c.restarts);
        c.seed = j.value("seed", c.seed);
        if (j.contains("space")) c.space = space_from_json(j["space"]);
        c.half_width = j.value("half_width", c.half_width);
        c.bisection_width = j.value("bisection_width", c.bisection_width);
        c.properties = j.value("properties", c.properties);
        if (j.contains("references"))
            for (const auto& r : j["references"]) {
                Reference ref;
                ref.quantity = r.at("quantity").get<std::string>();
                ref.params = r.value("params", json::object());
                ref.value = r.at("value").get<double>();
                ref.tol = r.value("tol", ref.tol);
                c.references.push_back(std::move(ref));
            }
        if (j.contains("output")) {
            c.output_dir = j["output"].value("dir", c.output_dir);
            c.format = j["output"].value("format", c.format);
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed config: ") + e.what());
    }
    c.validate();
    return c;
}

void ExperimentConfig::validate() const {
    auto fail = [this](const std::string& m) { throw std::invalid_argument("config '" + id + "': " + m); };
    if (id.empty()) fail("empty id");
    if (A.empty()) fail("A must be nonempty");
    if (!(p > 1.0) || !std::isfinite(p)) fail("p must be > 1");
    if (d < 1 || d > 8) fail("d must be in [1, 8]");
    if (!(alpha > 0.0 && alpha <= 2.0)) fail("alpha must be in (0, 2]");
    for (int n : depths)
        if (n < 1 || n > 16) fail("depths must be in [1, 16]");
    for (int n : resolutions)
        if (n < 2) fail("resolutions must be >= 2");
    if (restarts < 0) fail("restarts must be >= 0");
    if (format != "csv" && format != "json") fail("format must be csv or json");
    for (const auto& z : A)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) fail("A must be finite");
    const auto names = property_names();
    for (const auto& n : properties)
        if (std::find(names.begin(), names.end(), n) == names.end()) fail("unknown property '" + n + "'");
    switch (kind) {
        case ExperimentKind::IdentityCheck:
            if (depths.empty() && resolutions.empty()) fail("identity check needs depths or resolutions");
            break;
        case ExperimentKind::BellmanSweep:
            if (!all_real(A) || A.size() < 2) fail("Bellman sweep needs a real A with two distinct points");
            if (resolutions.empty()) fail("Bellman sweep needs grid resolutions");
            for (int m : resolutions)
                if (m < 3 || m % 2 == 0) fail("Bellman resolutions must be odd and >= 3");
            if (!(half_width > 0.0)) fail("half_width must be positive");
            if (!(bisection_width > 0.0)) fail("bisection_width must be positive");
            if (space.dim() != 1) fail("Bellman sweep is scalar only");
            break;
        case ExperimentKind::CounterexampleSweep:
            if (d < 2) fail("counterexample needs d >= 2");
            if (resolutions.empty()) fail("counterexample sweep needs resolutions");
            break;
        case ExperimentKind::PropertySuite: break;
    }
}

std::vector<ExperimentConfig> parse_configs(const json& j) {
    std::vector<ExperimentConfig> out;
    if (j.is_object() && j.contains("experiments")) {
        for (const auto& e : j["experiments"]) out.push_back(ExperimentConfig::from_json(e));
    } else {
        out.push_back(ExperimentConfig::from_json(j));
    }
    std::set<std::string> ids;
    for (const auto& c : out)
        if (!ids.insert(c.id).second) throw std::invalid_argument("duplicate experiment id '" + c.id + "'");
    return out;
}

std::vector<ExperimentConfig> load_configs(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) throw std::runtime_error("cannot read config " + file.string());
    json j;
    try {
        j = json::parse(is);
    } catch (const json::exception& e) {
        throw std::invalid_argument("config " + file.string() + " is not valid JSON: " + e.what());
    }
    return parse_configs(j);
}

// ---------------------------------------------------------------- analytic bounds

std::optional<double> known_umd_constant(const SpaceSpec& space, double p) {
    const double pstar = std::max(p, p / (p - 1.0));
    if (space.dim() == 1) return pstar - 1.0;
    const double q = space.exponent();
    if (q >= std::min(p, 2.0) && q <= std::max(p, 2.0)) return pstar - 1.0;
    return std::nullopt;
}

AnalyticBounds analytic_bounds(const std::vector<Scalar>& A, const SpaceSpec& space, double p) {
    AnalyticBounds b;
    const double sup = max_abs(A);
    const PointSet pts(A);
    if (pts.size() == 1) {
        b.lower = b.upper = sup;
        return b;
    }
    const auto beta = known_umd_constant(space, p);
    if (!beta) {
        b.lower = sup;
        return b;
    }
    if (all_real(A)) {
        double lo = A[0].real(), hi = A[0].real();
        for (const auto& a : A) {
            lo = std::min(lo, a.real());
            hi = std::max(hi, a.real());
        }
        b.lower = std::max({0.5 * (hi - lo) * *beta, std::abs(lo), std::abs(hi)});
        b.upper = std::min(0.5 * (hi - lo) * *beta + 0.5 * std::abs(hi + lo), sup * *beta);
    } else {
        b.lower = std::max(diameter(pts) * *beta / std::numbers::pi, sup);
        b.upper = sup * *beta;
    }
    return b;
}

// ---------------------------------------------------------------- runners

Report run_identity_check(const ExperimentConfig& c) {
    if (c.kind != ExperimentKind::IdentityCheck) throw std::invalid_argument("not an identity check");
    c.validate();
    Report r;
    const auto bounds = analytic_bounds(c.A, c.space, c.p);
    const json base{{"p", c.p}};
    if (bounds.upper) r.rows.push_back(make_row(c, "analytic_upper", "analytic", *bounds.upper, base, 0.0));
    if (bounds.lower) r.rows.push_back(make_row(c, "analytic_lower", "analytic", *bounds.lower, base, 0.0));

    const auto hull = convex_hull(PointSet(c.A));
    auto depths = c.depths;
    std::sort(depths.begin(), depths.end());
    std::vector<double> mvals, fvals;
    std::optional<BetaEstimate> prev;
    for (int depth : depths) {
        Stopwatch sw;
        const auto est = guarded(c, "martingale depth " + std::to_string(depth), [&] {
            TreeSearchOptions o;
            if (prev) {
                o.warm_start = prev->witness_tree;
                o.warm_plan = prev->witness_plan;
            }
            return optimize_tree(hull, c.p, depth, c.space, std::max(1, c.restarts), c.seed, o);
        });
        const json p{{"depth", depth}, {"p", c.p}, {"restarts", std::max(1, c.restarts)}, {"seed", c.seed}};
        r.rows.push_back(make_row(c, "beta_lower", "martingale", est.value, p, sw.ms()));
        if (!c.output_dir.empty())
            write_text(witness_dir(c) / (c.id + "-depth" + std::to_string(depth) + ".json"), witness_json(est).dump(1));
        mvals.push_back(est.value);
        prev = est;
    }

    auto resolutions = c.resolutions;
    std::sort(resolutions.begin(), resolutions.end());
    const auto symbol = SymbolSpec::power_quotient(c.alpha, power_quotient_coefficients(c.A, c.d));
    std::optional<GridField> warm;
    for (int N : resolutions) {
        Stopwatch sw;
        const auto est = guarded(c, "fft N=" + std::to_string(N), [&] {
            const auto op = make_operator(symbol, N, c.space);
            LpEstimateOptions o;
            o.p = c.p;
            o.restarts = c.restarts;
            o.seed = c.seed;
            if (warm && N % warm->N == 0) o.warm_starts.push_back(tile_upsample(*warm, N / warm->N));
            return norm_lower_bound(op, o);
        });
        const json p{{"N", N}, {"d", c.d}, {"alpha", c.alpha}, {"p", c.p}, {"restarts", c.restarts}, {"seed", c.seed}};
        r.rows.push_back(make_row(c, "fft_lower", "fft", est.value, p, sw.ms()));
        if (!c.output_dir.empty()) {
            const auto stem = witness_dir(c) / (c.id + "-N" + std::to_string(N));
            std::ofstream bin(stem.string() + ".bin", std::ios::binary);
            write_field_binary(est.witness, bin);
            write_text(stem.string() + ".json", field_header_json(est.witness, est.value, c.p));
        }
        fvals.push_back(est.value);
        warm = est.witness;
    }

    std::vector<double> all = mvals;
    all.insert(all.end(), fvals.begin(), fvals.end());
    if (bounds.upper) {
        const bool ok = std::all_of(all.begin(), all.end(), [&](double v) { return v <= *bounds.upper + 1e-6; });
        r.rows.push_back(verdict(c, "below_analytic_upper", ok, {{"upper", *bounds.upper}, {"slack", 1e-6}}));
    }
    if (PointSet(c.A).size() == 1) {
        const double a = max_abs(c.A);
        const bool ok = std::all_of(all.begin(), all.end(), [&](double v) { return std::abs(v - a) <= 1e-9; });
        r.rows.push_back(verdict(c, "singleton_exact", ok, {{"value", a}}));
    } else if (c.p == 2.0 && hilbert_like(c.space)) {
        const double a = max_abs(c.A);
        const bool ok = std::all_of(all.begin(), all.end(), [&](double v) { return std::abs(v - a) <= 1e-6; });
        r.rows.push_back(verdict(c, "p2_max_modulus", ok, {{"value", a}}));
    }
    if (mvals.size() > 1)
        r.rows.push_back(verdict(c, "martingale_nondecreasing", std::is_sorted(mvals.begin(), mvals.end())));
    if (fvals.size() > 1)
        r.rows.push_back(verdict(c, "fft_nondecreasing", std::is_sorted(fvals.begin(), fvals.end())));
    check_references(c, r);
    return r;
}

Report run_bellman_sweep(const ExperimentConfig& c) {
    if (c.kind != ExperimentKind::BellmanSweep) throw std::invalid_argument("not a Bellman sweep");
    c.validate();
    double b = c.A[0].real(), B = b;
    for (const auto& a : c.A) {
        b = std::min(b, a.real());
        B = std::max(B, a.real());
    }
    if (!(b < B)) throw std::invalid_argument("config '" + c.id + "': Bellman sweep needs b < B");
    Report r;
    const double beta = *known_umd_constant(SpaceSpec::scalar(), c.p);
    const double lower = std::max({0.5 * (B - b) * beta, std::abs(b), std::abs(B)});
    const double upper = 0.5 * (B - b) * beta + 0.5 * std::abs(B + b);
    const json base{{"p", c.p}, {"b", b}, {"B", B}};
    r.rows.push_back(make_row(c, "analytic_lower", "analytic", lower, base, 0.0));
    r.rows.push_back(make_row(c, "analytic_upper", "analytic", upper, base, 0.0));

    double mart = -kInf;
    std::optional<BetaEstimate> prev;
    auto depths = c.depths;
    std::sort(depths.begin(), depths.end());
    const auto hull = convex_hull(PointSet(c.A));
    for (int depth : depths) {
        Stopwatch sw;
        const auto est = guarded(c, "martingale depth " + std::to_string(depth), [&] {
            TreeSearchOptions o;
            if (prev) {
                o.warm_start = prev->witness_tree;
                o.warm_plan = prev->witness_plan;
            }
            return optimize_tree(hull, c.p, depth, SpaceSpec::scalar(), std::max(1, c.restarts), c.seed, o);
        });
        r.rows.push_back(make_row(c, "beta_lower", "martingale", est.value, {{"depth", depth}, {"p", c.p}}, sw.ms()));
        mart = std::max(mart, est.value);
        prev = est;
    }

    bool in_band = true, coherent = true;
    for (int M : c.resolutions) {
        Stopwatch sw;
        ThresholdOptions o;
        o.half_width = c.half_width;
        o.resolution = M;
        o.width = c.bisection_width;
        const auto t = guarded(c, "bellman M=" + std::to_string(M), [&] { return beta_threshold(b, B, c.p, o); });
        const json p{{"M", M},
                     {"L", c.half_width},
                     {"p", c.p},
                     {"b", b},
                     {"B", B},
                     {"width", t.width},
                     {"probes", t.probes},
                     {"lo_beta", t.lo.beta},
                     {"lo_status", to_string(t.lo.result.status)},
                     {"hi_beta", t.hi.beta},
                     {"hi_status", to_string(t.hi.result.status)}};
        r.rows.push_back(make_row(c, "beta_hat", "bellman", t.beta_hat, p, sw.ms()));
        in_band = in_band && t.beta_hat >= 0.85 * lower && t.beta_hat <= 1.15 * upper;
        if (!depths.empty()) coherent = coherent && mart - 1e-6 <= t.beta_hat + t.width;
    }
    r.rows.push_back(verdict(c, "within_widened_sandwich", in_band,
                             {{"lo", 0.85 * lower}, {"hi", 1.15 * upper}, {"widening", 0.15}}));
    if (!depths.empty()) r.rows.push_back(verdict(c, "martingale_below_bellman", coherent, {{"martingale", mart}}));
    check_references(c, r);
    return r;
}

Report run_counterexample_sweep(const ExperimentConfig& c) {
    if (c.kind != ExperimentKind::CounterexampleSweep) throw std::invalid_argument("not a counterexample sweep");
    c.validate();
    Report r;
    const auto symbol = SymbolSpec::counterexample(c.d);
    auto resolutions = c.resolutions;
    std::sort(resolutions.begin(), resolutions.end());
    std::vector<double> vals;
    std::optional<GridField> warm;
    for (int N : resolutions) {
        Stopwatch sw;
        const auto est = guarded(c, "fft N=" + std::to_string(N), [&] {
            LpEstimateOptions o;
            o.p = c.p;
            o.restarts = c.restarts;
            o.seed = c.seed;
            if (warm && N % warm->N == 0) o.warm_starts.push_back(tile_upsample(*warm, N / warm->N));
            return norm_lower_bound(make_operator(symbol, N, c.space), o);
        });
        r.rows.push_back(make_row(c, "fft_lower", "fft", est.value,
                                  {{"N", N}, {"d", c.d}, {"p", c.p}, {"restarts", c.restarts}, {"seed", c.seed}}, sw.ms()));
        vals.push_back(est.value);
        warm = est.witness;
    }
    if (c.p == 2.0) {
        const bool ok = std::all_of(vals.begin(), vals.end(), [](double v) { return v <= 1.0 + 1e-8; });
        r.rows.push_back(verdict(c, "bounded_at_p2", ok, {{"bound", 1.0 + 1e-8}}));
    } else {
        bool inc = true;
        for (std::size_t i = 1; i < vals.size(); ++i) inc = inc && vals[i] > vals[i - 1];
        r.rows.push_back(verdict(c, "strictly_increasing", inc));
    }
    check_references(c, r);
    return r;
}

Report run_property_suite(const ExperimentConfig& c) {
    if (c.kind != ExperimentKind::PropertySuite) throw std::invalid_argument("not a property suite");
    c.validate();
    const auto names = c.properties.empty() ? default_property_names() : c.properties;
    Report r;
    for (const auto& n : names)
        for (const auto& [name, fn] : registry())
            if (name == n) r.append(guarded(c, "property " + n, [&] { return fn(c); }));
    check_references(c, r);
    return r;
}

Report run_experiment(const ExperimentConfig& c) {
    switch (c.kind) {
        case ExperimentKind::IdentityCheck: return run_identity_check(c);
        case ExperimentKind::BellmanSweep: return run_bellman_sweep(c);
        case ExperimentKind::CounterexampleSweep: return run_counterexample_sweep(c);
        case ExperimentKind::PropertySuite: return run_property_suite(c);
    }
    throw std::logic_error("unhandled experiment kind");
}

Report run_batch(const std::vector<ExperimentConfig>& cs) {
    std::vector<Report> parts(cs.size());
    std::vector<std::exception_ptr> errors(cs.size());
    const int n = static_cast<int>(cs.size());
#pragma omp parallel for schedule(dynamic) if (n > 1)
    for (int i = 0; i < n; ++i) {
        try {
            parts[i] = run_experiment(cs[i]);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    Report out;
    for (const auto& p : parts) out.append(p);
    return out;
}

std::vector<std::pair<std::string, SymbolSpec>> shipped_symbols() {
    const Scalar I(0.0, 1.0);
    const auto pq = SymbolSpec::power_quotient(2.0, {1.0, -1.0});
    return {
        {"PowerQuotient", pq},
        {"SphericalPower", SymbolSpec::spherical_power(2, 1.3, {{{1.0, 0.0}, 1.0, 1.0}, {{0.6, 0.8}, 2.0, -1.0}})},
        {"BanuelosBogdan", SymbolSpec::banuelos_bogdan(2, {{{1.0, 2.0}, 0.5, I}}, {{{0.0, 1.0}, 1.0, -1.0}})},
        {"BeurlingAhlfors", SymbolSpec::beurling_ahlfors()},
        {"LogQuotient", SymbolSpec::log_quotient(2, {{{1.0, 0.0}, 1.0, 1.0}, {{0.0, 1.0}, 1.0, I}})},
        {"ShiftedPower", SymbolSpec::shifted_power(2, 1.0, 0.5)},
        {"KappaQuotient", SymbolSpec::kappa_quotient(0.5, 1.5, 1.0, -1.0)},
        {"Counterexample", SymbolSpec::counterexample(2)},
        {"Composed", pq.compose({std::cos(0.4), -std::sin(0.4), std::sin(0.4), std::cos(0.4)})},
        {"Padded", SymbolSpec::shifted_power(1, 1.0, 0.5).pad(2)},
        {"PlusConstant", pq.plus_constant(Scalar(0.5, 0.25))},
    };
}

std::vector<std::string> property_names() {
    std::vector<std::string> out;
    for (const auto& [n, f] : registry()) out.push_back(n);
    return out;
}

std::vector<std::string> default_property_names() {
    return {"symbol_sets",       "singleton", "scaling",        "hull_monotonicity", "adapted_vs_level",
            "extreme_point_sufficiency", "minkowski_subadditivity", "p2_closed_form", "reproducibility",
            "lifting",           "finite_duality"};
}

// ---------------------------------------------------------------- reports

bool Report::all_pass() const { return failures().empty(); }

std::vector<std::string> Report::failures() const {
    std::vector<std::string> out;
    const std::string prefix = kVerdictPrefix;
    for (const auto& r : rows)
        if (r.quantity.rfind(prefix, 0) == 0 && r.value != 1.0) out.push_back(r.experiment_id + " " + r.quantity);
    return out;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

}  // namespace

void write_csv(const Report& r, std::ostream& os) {
    os << "experiment_id,quantity,method,value,params_json,wall_ms\n";
    for (const auto& row : r.rows)
        os << csv_field(row.experiment_id) << ',' << csv_field(row.quantity) << ',' << row.method << ','
           << fmt("%.17g", row.value) << ',' << csv_field(row.params_json) << ',' << fmt("%.3f", row.wall_ms) << '\n';
}

namespace {

json rows_json(const Report& r) {
    json a = json::array();
    for (const auto& row : r.rows)
        a.push_back({{"experiment_id", row.experiment_id},
                     {"quantity", row.quantity},
                     {"method", row.method},
                     {"value", row.value},
                     {"params_json", row.params_json},
                     {"wall_ms", row.wall_ms}});
    return a;
}

}  // namespace

void write_json(const Report& r, std::ostream& os) { os << rows_json(r).dump(1) << '\n'; }

Report report_from_json(const json& j) {
    if (!j.is_array()) throw std::invalid_argument("report JSON must be a row list");
    Report r;
    for (const auto& e : j)
        r.rows.push_back({e.at("experiment_id").get<std::string>(), e.at("quantity").get<std::string>(),
                          e.at("method").get<std::string>(), e.at("value").get<double>(),
                          e.at("params_json").get<std::string>(), e.at("wall_ms").get<double>()});
    return r;
}

void emit(const Report& r, const std::filesystem::path& file, const std::string& format) {
    if (format != "csv" && format != "json") throw std::invalid_argument("format must be csv or json");
    if (file.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(file.parent_path(), ec);
    }
    std::ofstream os(file);
    if (!os) throw std::runtime_error("cannot write report to " + file.string());
    if (format == "csv")
        write_csv(r, os);
    else
        write_json(r, os);
    if (!os) throw std::runtime_error("failed writing report to " + file.string());
}

void set_timing_enabled(bool on) { g_timing.store(on); }
bool timing_enabled() { return g_timing.load(); }

// ---------------------------------------------------------------- cache

std::string canonical_config(const ExperimentConfig& c) {
    json j = c.to_json();
    j.erase("output");
    return j.dump();  // object keys are sorted, numbers in shortest round-trip form
}

std::uint64_t config_hash(const ExperimentConfig& c) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char ch : canonical_config(c)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

std::filesystem::path cache_file(const std::filesystem::path& dir, const ExperimentConfig& c) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx.json", static_cast<unsigned long long>(config_hash(c)));
    return dir / buf;
}

}  // namespace

std::optional<Report> cache_lookup(const std::filesystem::path& cache_dir, const ExperimentConfig& c) {
    const auto file = cache_file(cache_dir, c);
    std::ifstream is(file);
    if (!is) return std::nullopt;
    try {
        const json j = json::parse(is);
        if (j.at("config").get<std::string>() != canonical_config(c)) return std::nullopt;
        return report_from_json(j.at("rows"));
    } catch (const std::exception&) {
        return std::nullopt;  // unreadable entries are recomputed
    }
}

void cache_store(const std::filesystem::path& cache_dir, const ExperimentConfig& c, const Report& r) {
    std::filesystem::create_directories(cache_dir);
    const json j{{"config", canonical_config(c)}, {"rows", rows_json(r)}};
    write_text(cache_file(cache_dir, c), j.dump());
}

// ---------------------------------------------------------------- witnesses

json witness_json(const BetaEstimate& e) {
    const auto& t = e.witness_tree;
    json levels = json::array();
    for (int n = 0; n <= t.depth(); ++n) {
        json level = json::array();
        const std::size_t count = n == 0 ? 1 : std::size_t{1} << (n - 1);
        for (std::size_t h = 0; h < count; ++h) {
            json v = json::array();
            for (const auto& z : t.node(n, h)) v.push_back(json::array({z.real(), z.imag()}));
            level.push_back(v);
        }
        levels.push_back(level);
    }
    json plan = json::array();
    for (const auto& z : e.witness_plan.coefficients()) plan.push_back(json::array({z.real(), z.imag()}));
    return {{"space", space_json(t.space())},
            {"depth", t.depth()},
            {"levels", levels},
            {"plan", {{"mode", e.witness_plan.mode() == PlanMode::Level ? "level" : "adapted"}, {"coefficients", plan}}},
            {"p", e.p},
            {"ratio", e.value},
            {"seed", e.seed}};
}

std::pair<MartingaleTree, CoefficientPlan> witness_from_json(const json& j) {
    const SpaceSpec space = space_from_json(j.at("space"));
    const int depth = j.at("depth").get<int>();
    std::vector<Scalar> slots;
    for (const auto& level : j.at("levels"))
        for (const auto& node : level)
            for (const auto& z : node) slots.push_back(scalar_from(z));
    MartingaleTree tree(space, depth, std::move(slots));
    std::vector<Scalar> coeffs;
    for (const auto& z : j.at("plan").at("coefficients")) coeffs.push_back(scalar_from(z));
    const bool level = j.at("plan").at("mode") == "level";
    auto plan = level ? CoefficientPlan::level(std::move(coeffs)) : CoefficientPlan::adapted(depth, std::move(coeffs));
    return {std::move(tree), std::move(plan)};
}

}  // namespace umdlab
