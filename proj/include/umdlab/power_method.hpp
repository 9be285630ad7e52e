#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "umdlab/spaces.hpp"

namespace umdlab {

// A field is `points` samples of an element of `space`, stored point-major,
// equipped with the uniform-measure L^p(space) norm.
struct FieldShape {
    std::size_t points = 0;
    SpaceSpec space;

    std::size_t size() const { return points * static_cast<std::size_t>(space.dim()); }
};

double field_lp_norm(const FieldShape& shape, std::span<const Scalar> f, double p);

// Duality map of L^p(space): sample-wise subgradient of ||.||^p, i.e. the
// gradient of the p-th power of the field norm up to a positive factor.
void field_duality_map(const FieldShape& shape, std::span<const Scalar> f, double p, std::span<Scalar> out);

using FieldMap = std::function<void(std::span<const Scalar>, std::span<Scalar>)>;

struct PowerMethodOptions {
    double p = 2.0;
    int restarts = 8;
    int max_iter = 500;
    double rel_tol = 1e-9;
    std::uint64_t seed = 0;
    bool complex_starts = false;
    int max_halvings = 30;
    bool serial = false;  // run the starts one after another (reference path)
};

struct PowerMethodRun {
    double value = 0.0;
    std::vector<Scalar> witness;
    std::vector<double> history;  // best ratio after each accepted iteration
    int iterations = 0;
};

struct PowerMethodResult {
    double value = 0.0;
    std::vector<Scalar> witness;
    std::vector<PowerMethodRun> runs;
    int best_run = -1;
};

// Ratio ||T u||_p / ||u||_p; 0 for the zero field.
double rayleigh_ratio(const FieldMap& forward, const FieldShape& shape, std::span<const Scalar> u, double p);

// Single safeguarded nonlinear power run from u0:
//   u <- normalize(J_{p', X*}(T* J_{p, X}(T u)))
// A proposal is accepted only if the ratio does not decrease; otherwise the
// step toward it is halved.
PowerMethodRun power_iterate(const FieldMap& forward, const FieldMap& adjoint, const FieldShape& shape,
                             std::vector<Scalar> u0, const PowerMethodOptions& opt);

// Best over the given deterministic starts plus `opt.restarts` seeded
// white-noise starts. Starts run in parallel; the result does not depend on
// the thread count.
PowerMethodResult power_norm_estimate(const FieldMap& forward, const FieldMap& adjoint, const FieldShape& shape,
                                      const PowerMethodOptions& opt,
                                      const std::vector<std::vector<Scalar>>& extra_starts = {});

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace umdlab
