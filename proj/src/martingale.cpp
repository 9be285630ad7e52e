#include "umdlab/martingale.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "umdlab/power_method.hpp"

namespace umdlab {

namespace {

void check_depth(int depth) {
    if (depth < 0 || depth > 24) throw std::invalid_argument("tree depth out of range: " + std::to_string(depth));
}

// Terminal values of the transformed martingale, computed level by level:
// F_n[h] = F_{n-1}[h'] +/- c * phi_n[h'] with h' = h mod 2^{n-1}.
template <typename Coeff>
std::vector<Scalar> terminal_with(std::span<const Scalar> slots, std::size_t dim, int depth, Coeff coeff) {
    const std::size_t leaves = std::size_t{1} << depth;
    std::vector<Scalar> cur(leaves * dim);
    const Scalar c0 = coeff(0);
    for (std::size_t j = 0; j < dim; ++j) cur[j] = c0 * slots[j];
    for (int n = 1; n <= depth; ++n) {
        const std::size_t half = std::size_t{1} << (n - 1);
        for (std::size_t h = 0; h < half; ++h) {
            const std::size_t s = half + h;
            const Scalar c = coeff(s);
            for (std::size_t j = 0; j < dim; ++j) {
                const Scalar base = cur[h * dim + j];
                const Scalar step = c * slots[s * dim + j];
                cur[h * dim + j] = base + step;
                cur[(h + half) * dim + j] = base - step;
            }
        }
    }
    return cur;
}

double mean_pow(const SpaceSpec& space, std::span<const Scalar> leaves, std::size_t count, double p) {
    const std::size_t dim = static_cast<std::size_t>(space.dim());
    double s = 0.0;
    for (std::size_t l = 0; l < count; ++l) s += norm_pow(space, leaves.subspan(l * dim, dim), p);
    return s / static_cast<double>(count);
}

double transformed_pnorm(const MartingaleTree& f, const CoefficientPlan& plan, double p) {
    const auto g = terminal_with(f.slots(), f.dim(), f.depth(), [&](std::size_t s) { return plan.for_slot(s); });
    return std::pow(mean_pow(f.space(), g, f.leaf_count(), p), 1.0 / p);
}

void check_plan(const MartingaleTree& f, const CoefficientPlan& plan) {
    if (plan.depth() != f.depth())
        throw std::invalid_argument("plan depth " + std::to_string(plan.depth()) + " does not match tree depth " +
                                    std::to_string(f.depth()));
}

// Signed subtree sums of leaf data: out slot s = sum over leaves below s of r_n * leaf,
// slot 0 gets the plain total.
std::vector<Scalar> signed_subtree_sums(std::span<const Scalar> leaves, std::size_t dim, int depth) {
    std::vector<Scalar> acc(leaves.begin(), leaves.end());
    std::vector<Scalar> out((std::size_t{1} << depth) * dim);
    for (int n = depth; n >= 1; --n) {
        const std::size_t half = std::size_t{1} << (n - 1);
        for (std::size_t h = 0; h < half; ++h) {
            for (std::size_t j = 0; j < dim; ++j) {
                const Scalar plus = acc[h * dim + j];
                const Scalar minus = acc[(h + half) * dim + j];
                out[(half + h) * dim + j] = plus - minus;
                acc[h * dim + j] = plus + minus;
            }
        }
    }
    for (std::size_t j = 0; j < dim; ++j) out[j] = acc[j];
    return out;
}

}  // namespace

// ---------------------------------------------------------------- tree

MartingaleTree::MartingaleTree(SpaceSpec space, int depth) : space_(space), depth_(depth) {
    check_depth(depth);
    slots_.assign(slot_count() * dim(), Scalar{});
}

MartingaleTree::MartingaleTree(SpaceSpec space, int depth, std::vector<Scalar> slots)
    : space_(space), depth_(depth), slots_(std::move(slots)) {
    check_depth(depth);
    if (slots_.size() != slot_count() * dim())
        throw std::invalid_argument("tree needs 2^depth * dim slot values");
    for (const auto& x : slots_)
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
            throw std::invalid_argument("tree values must be finite");
}

int MartingaleTree::slot_level(std::size_t s) { return static_cast<int>(std::bit_width(s)); }

std::vector<Scalar> MartingaleTree::terminal_values() const {
    return terminal_with(slots_, dim(), depth_, [](std::size_t) { return Scalar(1.0); });
}

MartingaleTree MartingaleTree::padded(int new_depth) const {
    if (new_depth < depth_) throw std::invalid_argument("padding cannot reduce depth");
    std::vector<Scalar> s((std::size_t{1} << new_depth) * dim());
    std::copy(slots_.begin(), slots_.end(), s.begin());
    return MartingaleTree(space_, new_depth, std::move(s));
}

MartingaleTree tree_from_terminal(SpaceSpec space, int depth, std::span<const Scalar> terminal) {
    check_depth(depth);
    const std::size_t dim = static_cast<std::size_t>(space.dim());
    const std::size_t leaves = std::size_t{1} << depth;
    if (terminal.size() != leaves * dim) throw std::invalid_argument("terminal value count mismatch");
    std::vector<Scalar> acc(terminal.begin(), terminal.end());
    std::vector<Scalar> slots(leaves * dim);
    // phi_n(h) = (f_n(h) - f_n(h + 2^{n-1})) / 2 and f_{n-1}(h) is the midpoint
    for (int n = depth; n >= 1; --n) {
        const std::size_t half = std::size_t{1} << (n - 1);
        for (std::size_t h = 0; h < half; ++h)
            for (std::size_t j = 0; j < dim; ++j) {
                const Scalar a = acc[h * dim + j];
                const Scalar b = acc[(h + half) * dim + j];
                slots[(half + h) * dim + j] = 0.5 * (a - b);
                acc[h * dim + j] = 0.5 * (a + b);
            }
    }
    for (std::size_t j = 0; j < dim; ++j) slots[j] = acc[j];
    return MartingaleTree(space, depth, std::move(slots));
}

// ---------------------------------------------------------------- plans

CoefficientPlan::CoefficientPlan(PlanMode mode, int depth, std::vector<Scalar> coeffs)
    : mode_(mode), depth_(depth), coeffs_(std::move(coeffs)) {
    for (const auto& c : coeffs_)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw std::invalid_argument("plan coefficients must be finite");
}

CoefficientPlan CoefficientPlan::level(std::vector<Scalar> per_level) {
    if (per_level.empty()) throw std::invalid_argument("level plan needs the root coefficient");
    const int depth = static_cast<int>(per_level.size()) - 1;
    check_depth(depth);
    return CoefficientPlan(PlanMode::Level, depth, std::move(per_level));
}

CoefficientPlan CoefficientPlan::adapted(int depth, std::vector<Scalar> per_slot) {
    check_depth(depth);
    if (per_slot.size() != (std::size_t{1} << depth))
        throw std::invalid_argument("adapted plan needs 2^depth coefficients");
    return CoefficientPlan(PlanMode::Adapted, depth, std::move(per_slot));
}

CoefficientPlan CoefficientPlan::constant(PlanMode mode, int depth, Scalar a) {
    check_depth(depth);
    const std::size_t n = mode == PlanMode::Level ? static_cast<std::size_t>(depth) + 1 : std::size_t{1} << depth;
    return CoefficientPlan(mode, depth, std::vector<Scalar>(n, a));
}

Scalar CoefficientPlan::for_slot(std::size_t s) const {
    if (mode_ == PlanMode::Level) return coeffs_[static_cast<std::size_t>(MartingaleTree::slot_level(s))];
    return coeffs_[s];
}

CoefficientPlan CoefficientPlan::scaled(Scalar a) const {
    std::vector<Scalar> c(coeffs_);
    for (auto& x : c) x *= a;
    return CoefficientPlan(mode_, depth_, std::move(c));
}

CoefficientPlan CoefficientPlan::as_adapted() const {
    if (mode_ == PlanMode::Adapted) return *this;
    std::vector<Scalar> c(std::size_t{1} << depth_);
    for (std::size_t s = 0; s < c.size(); ++s) c[s] = for_slot(s);
    return CoefficientPlan(PlanMode::Adapted, depth_, std::move(c));
}

CoefficientPlan CoefficientPlan::padded(int new_depth) const {
    if (new_depth < depth_) throw std::invalid_argument("padded plan must be at least as deep");
    // coefficients on the new (zero) increments are irrelevant; repeat the root one
    auto c = coeffs_;
    const std::size_t n = mode_ == PlanMode::Level ? static_cast<std::size_t>(new_depth) + 1 : std::size_t{1} << new_depth;
    c.resize(n, coeffs_.front());
    return CoefficientPlan(mode_, new_depth, std::move(c));
}

bool CoefficientPlan::within(const ConvexRegion& hull, double slack) const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [&](const Scalar& c) { return contains(hull, c, slack); });
}

// ---------------------------------------------------------------- evaluation

double terminal_pnorm(const MartingaleTree& f, double p) {
    if (!(p > 1.0)) throw std::invalid_argument("terminal_pnorm needs p > 1");
    const auto leaves = f.terminal_values();
    return std::pow(mean_pow(f.space(), leaves, f.leaf_count(), p), 1.0 / p);
}

MartingaleTree apply_transform(const MartingaleTree& f, const CoefficientPlan& plan) {
    check_plan(f, plan);
    std::vector<Scalar> s(f.slots().begin(), f.slots().end());
    const std::size_t dim = f.dim();
    for (std::size_t k = 0; k < f.slot_count(); ++k) {
        const Scalar c = plan.for_slot(k);
        for (std::size_t j = 0; j < dim; ++j) s[k * dim + j] *= c;
    }
    return MartingaleTree(f.space(), f.depth(), std::move(s));
}

double ratio(const MartingaleTree& f, const CoefficientPlan& plan, double p) {
    check_plan(f, plan);
    const double den = terminal_pnorm(f, p);
    if (den == 0.0) throw std::domain_error("ratio undefined: martingale vanishes identically");
    return transformed_pnorm(f, plan, p) / den;
}

std::vector<Scalar> ratio_gradient(const MartingaleTree& f, const CoefficientPlan& plan, double p) {
    check_plan(f, plan);
    const std::size_t dim = f.dim();
    const std::size_t leaves = f.leaf_count();
    const auto fl = f.terminal_values();
    const auto gl = terminal_with(f.slots(), dim, f.depth(), [&](std::size_t s) { return plan.for_slot(s); });
    const double ef = mean_pow(f.space(), fl, leaves, p);
    if (ef == 0.0) throw std::domain_error("ratio undefined: martingale vanishes identically");
    const double eg = mean_pow(f.space(), gl, leaves, p);
    const double r = eg / ef;

    std::vector<Scalar> df(fl.size()), dg(gl.size());
    for (std::size_t l = 0; l < leaves; ++l) {
        norm_pow_subgradient(f.space(), std::span<const Scalar>(fl).subspan(l * dim, dim), p,
                             std::span<Scalar>(df).subspan(l * dim, dim));
        norm_pow_subgradient(f.space(), std::span<const Scalar>(gl).subspan(l * dim, dim), p,
                             std::span<Scalar>(dg).subspan(l * dim, dim));
    }
    const auto sf = signed_subtree_sums(df, dim, f.depth());
    const auto sg = signed_subtree_sums(dg, dim, f.depth());
    // d(eg/ef) = (d eg - r d ef) / ef, with d E = 2^{-N} sum over leaves
    const double scale = 1.0 / (static_cast<double>(leaves) * ef);
    std::vector<Scalar> grad(sf.size());
    for (std::size_t s = 0; s < f.slot_count(); ++s) {
        const Scalar cc = std::conj(plan.for_slot(s));
        for (std::size_t j = 0; j < dim; ++j)
            grad[s * dim + j] = scale * (cc * sg[s * dim + j] - r * sf[s * dim + j]);
    }
    return grad;
}

// ---------------------------------------------------------------- plan search

CoefficientPlan optimize_coefficients(const MartingaleTree& f, const ConvexRegion& hull, PlanMode mode, double p,
                                      std::uint64_t budget, std::uint64_t seed, const CoefficientPlan* start) {
    if (terminal_pnorm(f, p) == 0.0) throw std::domain_error("optimize_coefficients needs a nonzero martingale");
    const auto& ext = hull.extreme_points();
    const std::size_t k = ext.size();
    const std::size_t slots = mode == PlanMode::Level ? static_cast<std::size_t>(f.depth()) + 1 : f.slot_count();
    auto make = [&](const std::vector<std::size_t>& idx) {
        std::vector<Scalar> c(slots);
        for (std::size_t s = 0; s < slots; ++s) c[s] = ext[idx[s]];
        return mode == PlanMode::Level ? CoefficientPlan::level(std::move(c))
                                       : CoefficientPlan::adapted(f.depth(), std::move(c));
    };
    std::vector<std::size_t> idx(slots, 0);
    if (k == 1) return make(idx);

    // exact enumeration when k^slots fits the budget
    double total = 1.0;
    for (std::size_t s = 0; s < slots && total <= static_cast<double>(budget); ++s) total *= static_cast<double>(k);
    if (total <= static_cast<double>(budget)) {
        std::vector<std::size_t> best_idx = idx;
        double best = -1.0;
        while (true) {
            const double v = transformed_pnorm(f, make(idx), p);
            if (v > best) {
                best = v;
                best_idx = idx;
            }
            std::size_t s = 0;
            while (s < slots && ++idx[s] == k) idx[s++] = 0;
            if (s == slots) break;
        }
        return make(best_idx);
    }

    // cyclic coordinate ascent: slots in order, each takes its best extreme value
    if (start != nullptr && start->mode() == mode && start->depth() == f.depth()) {
        for (std::size_t s = 0; s < slots; ++s) {
            const Scalar c = start->coefficients()[s];
            std::size_t nearest = 0;
            for (std::size_t e = 1; e < k; ++e)
                if (std::abs(ext[e] - c) < std::abs(ext[nearest] - c)) nearest = e;
            idx[s] = nearest;
        }
    } else {
        std::mt19937_64 rng(mix_seed(seed, 0x5107));
        std::uniform_int_distribution<std::size_t> pick(0, k - 1);
        for (auto& i : idx) i = pick(rng);
    }
    double best = transformed_pnorm(f, make(idx), p);
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t s = 0; s < slots; ++s) {
            const std::size_t keep = idx[s];
            std::size_t choice = keep;
            for (std::size_t e = 0; e < k; ++e) {
                if (e == keep) continue;
                idx[s] = e;
                const double v = transformed_pnorm(f, make(idx), p);
                if (v > best * (1.0 + 1e-14)) {
                    best = v;
                    choice = e;
                    improved = true;
                }
            }
            idx[s] = choice;
        }
    }
    return make(idx);
}

// ---------------------------------------------------------------- tree search

namespace {

struct Candidate {
    MartingaleTree tree;
    CoefficientPlan plan;
    double value;
};

MartingaleTree normalized(const SpaceSpec& space, int depth, std::vector<Scalar> slots, double p) {
    MartingaleTree t(space, depth, std::move(slots));
    const double n = terminal_pnorm(t, p);
    if (n == 0.0) return t;
    std::vector<Scalar> s(t.slots().begin(), t.slots().end());
    for (auto& x : s) x /= n;
    return MartingaleTree(space, depth, std::move(s));
}

double l2(std::span<const Scalar> v) {
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return std::sqrt(s);
}

// Safeguarded projected gradient ascent with the plan fixed. Backtracking
// halves from min(0.5, 4 * last accepted step). Returns the number of accepted steps.
int ascend(Candidate& c, double p, int max_steps, bool complex_values, double rel_tol) {
    int accepted = 0;
    double t0 = 0.5;
    const auto& space = c.tree.space();
    const std::size_t leaves = c.tree.leaf_count();
    auto coeff = [&](std::size_t s) { return c.plan.for_slot(s); };
    auto one = [](std::size_t) { return Scalar(1.0); };
    for (int step = 0; step < max_steps; ++step) {
        auto grad = ratio_gradient(c.tree, c.plan, p);
        if (!complex_values)
            for (auto& g : grad) g = Scalar(g.real(), 0.0);
        const double gn = l2(grad);
        const double xn = l2(c.tree.slots());
        if (gn == 0.0 || xn == 0.0) break;
        bool ok = false;
        double t = t0;
        std::vector<Scalar> s(c.tree.slots().size());
        for (int h = 0; h < 40; ++h, t *= 0.5) {
            const double mult = t * xn / gn;
            for (std::size_t k = 0; k < s.size(); ++k) s[k] = c.tree.slots()[k] + mult * grad[k];
            const double ef = mean_pow(space, terminal_with(s, c.tree.dim(), c.tree.depth(), one), leaves, p);
            if (ef == 0.0) continue;
            const double eg = mean_pow(space, terminal_with(s, c.tree.dim(), c.tree.depth(), coeff), leaves, p);
            const double v = std::pow(eg / ef, 1.0 / p);
            if (v >= c.value) {
                const double gain = v - c.value;
                c.tree = normalized(space, c.tree.depth(), std::move(s), p);
                c.value = v;
                ok = true;
                ++accepted;
                t0 = std::min(0.5, 4.0 * t);
                if (gain <= 1e-3 * rel_tol * v) return accepted;
                break;
            }
        }
        if (!ok) break;
    }
    return accepted;
}

Candidate run_restart(const ConvexRegion& hull, double p, int depth, const SpaceSpec& space, std::uint64_t stream_seed,
                      const TreeSearchOptions& opt, bool complex_values, const MartingaleTree* warm) {
    const std::size_t n = (std::size_t{1} << depth) * static_cast<std::size_t>(space.dim());
    std::vector<Scalar> slots;
    if (warm != nullptr) {
        const auto w = warm->padded(depth);
        slots.assign(w.slots().begin(), w.slots().end());
    } else {
        std::mt19937_64 rng(stream_seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        slots.resize(n);
        for (auto& x : slots) {
            const double re = u(rng);
            const double im = complex_values ? u(rng) : 0.0;
            x = Scalar(re, im);
        }
    }
    auto tree = normalized(space, depth, std::move(slots), p);
    std::optional<CoefficientPlan> start;
    if (warm != nullptr && opt.warm_plan && opt.warm_plan->mode() == opt.mode && opt.warm_plan->within(hull))
        start = opt.warm_plan->padded(depth);
    auto plan = optimize_coefficients(tree, hull, opt.mode, p, opt.budget, stream_seed, start ? &*start : nullptr);
    Candidate c{tree, plan, ratio(tree, plan, p)};
    for (int round = 0; round < opt.max_rounds; ++round) {
        const double before = c.value;
        ascend(c, p, opt.ascent_steps, complex_values, opt.rel_tol);
        auto next_plan = optimize_coefficients(c.tree, hull, opt.mode, p, opt.budget, stream_seed, &c.plan);
        const double v = ratio(c.tree, next_plan, p);
        if (v >= c.value) {
            c.plan = std::move(next_plan);
            c.value = v;
        }
        if (c.value - before <= opt.rel_tol * c.value) break;
    }
    return c;
}

}  // namespace

BetaEstimate optimize_tree(const ConvexRegion& hull, double p, int depth, SpaceSpec space, int restarts,
                           std::uint64_t seed, const TreeSearchOptions& options) {
    if (depth < 1) throw std::invalid_argument("optimize_tree needs depth >= 1");
    if (restarts < 1) throw std::invalid_argument("optimize_tree needs restarts >= 1");
    if (!(p > 1.0)) throw std::invalid_argument("optimize_tree needs p > 1");
    if (options.warm_start && (options.warm_start->depth() > depth || !(options.warm_start->space() == space)))
        throw std::invalid_argument("warm start must be shallower and in the same space");
    if (options.warm_start && terminal_pnorm(*options.warm_start, p) == 0.0)
        throw std::domain_error("warm start martingale vanishes identically");
    const bool complex_values = options.complex_values.value_or(!std::all_of(
        hull.extreme_points().begin(), hull.extreme_points().end(), [](const Scalar& z) { return z.imag() == 0.0; }));

    std::vector<std::optional<Candidate>> results(static_cast<std::size_t>(restarts));
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < restarts; ++r) {
        const MartingaleTree* warm = (r == 0 && options.warm_start) ? &*options.warm_start : nullptr;
        results[static_cast<std::size_t>(r)] =
            run_restart(hull, p, depth, space, mix_seed(seed, static_cast<std::uint64_t>(r)), options, complex_values, warm);
    }
    std::size_t best = 0;
    for (std::size_t r = 1; r < results.size(); ++r)
        if (results[r]->value > results[best]->value) best = r;

    BetaEstimate est;
    est.value = results[best]->value;
    est.witness_tree = results[best]->tree;
    est.witness_plan = results[best]->plan;
    est.p = p;
    est.depth = depth;
    est.restarts_used = restarts;
    est.seed = seed;
    return est;
}

// ---------------------------------------------------------------- lifting

std::pair<CoefficientPlan, CoefficientPlan> lift_witness(const CoefficientPlan& sign_plan, Scalar a1, Scalar a2) {
    for (const auto& e : sign_plan.coefficients())
        if (!(e == Scalar(1.0) || e == Scalar(-1.0)))
            throw std::invalid_argument("lift_witness needs a {-1, 1}-valued plan");
    const Scalar mid = 0.5 * (a1 + a2);
    const Scalar half = 0.5 * (a1 - a2);
    auto lift = [&](double sgn) {
        std::vector<Scalar> c;
        c.reserve(sign_plan.coefficients().size());
        for (const auto& e : sign_plan.coefficients()) c.push_back(mid + sgn * half * e);
        return sign_plan.mode() == PlanMode::Level ? CoefficientPlan::level(std::move(c))
                                                   : CoefficientPlan::adapted(sign_plan.depth(), std::move(c));
    };
    return {lift(1.0), lift(-1.0)};
}

// ---------------------------------------------------------------- finite matrices

DenseMatrix DenseMatrix::adjoint() const {
    DenseMatrix a{cols, rows, std::vector<Scalar>(data.size())};
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) a.data[j * rows + i] = std::conj(data[i * cols + j]);
    return a;
}

void DenseMatrix::apply(std::span<const Scalar> x, std::span<Scalar> y) const {
    for (std::size_t i = 0; i < rows; ++i) {
        Scalar s{};
        for (std::size_t j = 0; j < cols; ++j) s += data[i * cols + j] * x[j];
        y[i] = s;
    }
}

DenseMatrix finite_transform_matrix(int depth, const CoefficientPlan& plan) {
    if (depth > kMaxMatrixDepth)
        throw std::invalid_argument("finite_transform_matrix supports depth <= " + std::to_string(kMaxMatrixDepth));
    if (plan.depth() != depth) throw std::invalid_argument("plan depth mismatch");
    const std::size_t n = std::size_t{1} << depth;
    DenseMatrix m{n, n, std::vector<Scalar>(n * n)};
    std::vector<Scalar> e(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::fill(e.begin(), e.end(), Scalar{});
        e[col] = 1.0;
        const auto g = apply_transform(tree_from_terminal(SpaceSpec::scalar(), depth, e), plan).terminal_values();
        for (std::size_t row = 0; row < n; ++row) m.data[row * n + col] = g[row];
    }
    return m;
}

AdjointNormCheck adjoint_pnorm_check(const DenseMatrix& m, double p, int restarts, std::uint64_t seed, double tol) {
    const auto adj = m.adjoint();
    const FieldShape shape{m.cols, SpaceSpec::scalar()};
    FieldMap fwd = [&](std::span<const Scalar> x, std::span<Scalar> y) { m.apply(x, y); };
    FieldMap bwd = [&](std::span<const Scalar> x, std::span<Scalar> y) { adj.apply(x, y); };
    PowerMethodOptions opt;
    opt.restarts = restarts;
    opt.seed = seed;
    opt.max_iter = 2000;
    opt.rel_tol = 1e-13;
    opt.p = p;
    AdjointNormCheck out;
    out.norm_p = power_norm_estimate(fwd, bwd, shape, opt).value;
    opt.p = dual_exponent(p);
    out.norm_dual = power_norm_estimate(bwd, fwd, shape, opt).value;
    out.agree = std::abs(out.norm_p - out.norm_dual) <= tol;
    return out;
}

}  // namespace umdlab
