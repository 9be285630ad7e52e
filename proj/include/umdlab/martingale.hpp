#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "umdlab/spaces.hpp"
#include "umdlab/symbol_sets.hpp"

namespace umdlab {

// Complete binary Paley-Walsh martingale of depth N over a fair sign sequence
// r_1..r_N. Storage is by slot: slot 0 holds f_0, slots [2^{n-1}, 2^n) hold
// phi_n on the 2^{n-1} sign histories of level n. Leaf index l carries r_n in
// bit n-1 (bit set means r_n = -1), so the history of level n is l mod 2^{n-1}.
class MartingaleTree {
public:
    MartingaleTree(SpaceSpec space, int depth);
    MartingaleTree(SpaceSpec space, int depth, std::vector<Scalar> slots);

    const SpaceSpec& space() const { return space_; }
    int depth() const { return depth_; }
    std::size_t slot_count() const { return std::size_t{1} << depth_; }
    std::size_t leaf_count() const { return std::size_t{1} << depth_; }
    std::size_t dim() const { return static_cast<std::size_t>(space_.dim()); }

    std::span<const Scalar> slots() const { return slots_; }
    std::span<const Scalar> root() const { return slot(0); }
    std::span<const Scalar> node(int level, std::size_t history) const { return slot(slot_index(level, history)); }
    std::span<const Scalar> slot(std::size_t s) const { return std::span<const Scalar>(slots_).subspan(s * dim(), dim()); }

    static std::size_t slot_index(int level, std::size_t history) {
        return level == 0 ? 0 : (std::size_t{1} << (level - 1)) + history;
    }
    static int slot_level(std::size_t s);

    // f_N on every leaf, leaf-major (leaf_count * dim).
    std::vector<Scalar> terminal_values() const;

    // Same martingale with zero increments appended down to new_depth.
    MartingaleTree padded(int new_depth) const;

private:
    SpaceSpec space_;
    int depth_;
    std::vector<Scalar> slots_;
};

// Martingale with the given terminal values (leaf-major), recovered through
// conditional expectations.
MartingaleTree tree_from_terminal(SpaceSpec space, int depth, std::span<const Scalar> terminal);

enum class PlanMode { Level, Adapted };

// Level: one coefficient per level 0..N. Adapted: one per slot (root + every node).
class CoefficientPlan {
public:
    static CoefficientPlan level(std::vector<Scalar> per_level);
    static CoefficientPlan adapted(int depth, std::vector<Scalar> per_slot);
    static CoefficientPlan constant(PlanMode mode, int depth, Scalar a);

    PlanMode mode() const { return mode_; }
    int depth() const { return depth_; }
    const std::vector<Scalar>& coefficients() const { return coeffs_; }
    Scalar for_slot(std::size_t s) const;

    CoefficientPlan scaled(Scalar a) const;
    CoefficientPlan as_adapted() const;
    // same plan on a deeper tree
    CoefficientPlan padded(int new_depth) const;
    bool within(const ConvexRegion& hull, double slack = kContainSlack) const;

private:
    CoefficientPlan(PlanMode mode, int depth, std::vector<Scalar> coeffs);
    PlanMode mode_;
    int depth_;
    std::vector<Scalar> coeffs_;
};

// (2^{-N} sum_leaves ||f_N||^p)^{1/p}
double terminal_pnorm(const MartingaleTree& f, double p);
MartingaleTree apply_transform(const MartingaleTree& f, const CoefficientPlan& plan);
// ||T f||_p / ||f||_p; throws std::domain_error when f vanishes identically.
double ratio(const MartingaleTree& f, const CoefficientPlan& plan, double p);

inline constexpr std::uint64_t kDefaultEnumerationBudget = 1u << 14;

// Best plan with coefficients in Ext(hull). Exact enumeration when
// |Ext|^slots <= budget, otherwise cyclic coordinate ascent started from
// `start` (or a seeded random plan); the ascent never decreases the objective.
CoefficientPlan optimize_coefficients(const MartingaleTree& f, const ConvexRegion& hull, PlanMode mode, double p,
                                      std::uint64_t budget = kDefaultEnumerationBudget, std::uint64_t seed = 0,
                                      const CoefficientPlan* start = nullptr);

struct TreeSearchOptions {
    PlanMode mode = PlanMode::Level;
    // enumeration budget of the plan step inside the alternation; larger plan
    // spaces use coordinate ascent warm-started from the current plan
    std::uint64_t budget = 256;
    int max_rounds = 200;       // alternation cap
    int ascent_steps = 25;      // accepted gradient steps per round
    double rel_tol = 1e-8;
    std::optional<bool> complex_values;  // default: true iff the hull has non-real points
    std::optional<MartingaleTree> warm_start;  // replaces the first random start
    std::optional<CoefficientPlan> warm_plan;  // plan search for the warm start begins here
};

struct BetaEstimate {
    double value = 0.0;
    MartingaleTree witness_tree{SpaceSpec::scalar(), 0};
    CoefficientPlan witness_plan = CoefficientPlan::level({1.0});
    double p = 2.0;
    int depth = 0;
    int restarts_used = 0;
    std::uint64_t seed = 0;
};

// Alternating maximization (tree values by safeguarded gradient ascent on the
// sphere terminal_pnorm = 1, then the plan) over `restarts` seeded starts.
// The value is an achieved ratio, hence a lower bound for the UMD_p^A constant.
BetaEstimate optimize_tree(const ConvexRegion& hull, double p, int depth, SpaceSpec space, int restarts,
                           std::uint64_t seed, const TreeSearchOptions& options = {});

// Gradient of ratio^p with respect to the slot values (slot-major, same layout as the tree).
std::vector<Scalar> ratio_gradient(const MartingaleTree& f, const CoefficientPlan& plan, double p);

// Plans (a1+a2)/2 + s (a1-a2)/2 eps_n for s = +1, -1.
std::pair<CoefficientPlan, CoefficientPlan> lift_witness(const CoefficientPlan& sign_plan, Scalar a1, Scalar a2);

// Dense matrix of f_N -> (T_plan f)_N on the 2^N leaf values, row-major.
struct DenseMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<Scalar> data;

    Scalar operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    DenseMatrix adjoint() const;
    void apply(std::span<const Scalar> x, std::span<Scalar> y) const;
};

inline constexpr int kMaxMatrixDepth = 6;

DenseMatrix finite_transform_matrix(int depth, const CoefficientPlan& plan);

struct AdjointNormCheck {
    double norm_p = 0.0;
    double norm_dual = 0.0;
    bool agree = false;
};

AdjointNormCheck adjoint_pnorm_check(const DenseMatrix& m, double p, int restarts = 32, std::uint64_t seed = 0,
                                     double tol = 1e-4);

}  // namespace umdlab
