#include "umdlab/power_method.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace umdlab {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over (seed, stream)
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double field_lp_norm(const FieldShape& shape, std::span<const Scalar> f, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("field norm needs p >= 1");
    if (f.size() != shape.size()) throw std::invalid_argument("field size mismatch");
    const std::size_t dim = static_cast<std::size_t>(shape.space.dim());
    if (shape.points == 0) return 0.0;
    // two-pass with max scaling for large p
    std::vector<double> nrm(shape.points);
    double mx = 0.0;
    for (std::size_t i = 0; i < shape.points; ++i) {
        nrm[i] = norm(shape.space, f.subspan(i * dim, dim));
        mx = std::max(mx, nrm[i]);
    }
    if (mx == 0.0) return 0.0;
    double s = 0.0;
    for (double a : nrm) s += std::pow(a / mx, p);
    return mx * std::pow(s / static_cast<double>(shape.points), 1.0 / p);
}

void field_duality_map(const FieldShape& shape, std::span<const Scalar> f, double p, std::span<Scalar> out) {
    const std::size_t dim = static_cast<std::size_t>(shape.space.dim());
    const double scale = field_lp_norm(shape, f, p);
    if (scale == 0.0) {
        std::fill(out.begin(), out.end(), Scalar{});
        return;
    }
    std::vector<Scalar> tmp(dim);
    for (std::size_t i = 0; i < shape.points; ++i) {
        for (std::size_t j = 0; j < dim; ++j) tmp[j] = f[i * dim + j] / scale;
        norm_pow_subgradient(shape.space, tmp, p, out.subspan(i * dim, dim));
    }
}

double rayleigh_ratio(const FieldMap& forward, const FieldShape& shape, std::span<const Scalar> u, double p) {
    const double nu = field_lp_norm(shape, u, p);
    if (nu == 0.0) return 0.0;
    std::vector<Scalar> tu(shape.size());
    forward(u, tu);
    return field_lp_norm(shape, tu, p) / nu;
}

namespace {

void normalize(const FieldShape& shape, std::vector<Scalar>& u, double p) {
    const double n = field_lp_norm(shape, u, p);
    if (n > 0.0)
        for (auto& x : u) x /= n;
}

}  // namespace

PowerMethodRun power_iterate(const FieldMap& forward, const FieldMap& adjoint, const FieldShape& shape,
                             std::vector<Scalar> u, const PowerMethodOptions& opt) {
    const double p = opt.p;
    if (!(p > 1.0)) throw std::invalid_argument("power method needs p > 1");
    const double pd = dual_exponent(p);
    const FieldShape dual_shape{shape.points, shape.space.dual()};

    PowerMethodRun run;
    normalize(shape, u, p);
    double best = rayleigh_ratio(forward, shape, u, p);
    run.history.push_back(best);

    std::vector<Scalar> tu(shape.size()), ju(shape.size()), z(shape.size()), next(shape.size()), trial(shape.size());
    for (int it = 0; it < opt.max_iter; ++it) {
        forward(u, tu);
        field_duality_map(shape, tu, p, ju);
        adjoint(ju, z);
        field_duality_map(dual_shape, z, pd, next);
        normalize(shape, next, p);
        if (field_lp_norm(shape, next, p) == 0.0) break;

        double t = 1.0;
        bool accepted = false;
        double value = 0.0;
        for (int h = 0; h <= opt.max_halvings; ++h, t *= 0.5) {
            for (std::size_t k = 0; k < u.size(); ++k) trial[k] = u[k] + t * (next[k] - u[k]);
            normalize(shape, trial, p);
            value = rayleigh_ratio(forward, shape, trial, p);
            if (value >= best) {
                accepted = true;
                break;
            }
        }
        run.iterations = it + 1;
        if (!accepted) break;
        const double gain = value - best;
        u.swap(trial);
        best = value;
        run.history.push_back(best);
        if (gain <= opt.rel_tol * best) break;
    }
    run.value = best;
    run.witness = std::move(u);
    return run;
}

PowerMethodResult power_norm_estimate(const FieldMap& forward, const FieldMap& adjoint, const FieldShape& shape,
                                      const PowerMethodOptions& opt,
                                      const std::vector<std::vector<Scalar>>& extra_starts) {
    const int n_extra = static_cast<int>(extra_starts.size());
    const int total = n_extra + opt.restarts;
    if (total < 1) throw std::invalid_argument("power method needs at least one start");
    if (!(opt.p > 1.0)) throw std::invalid_argument("power method needs p > 1");
    for (const auto& s : extra_starts)
        if (s.size() != shape.size()) throw std::invalid_argument("start field size mismatch");
    PowerMethodResult result;
    result.runs.resize(static_cast<std::size_t>(total));

#pragma omp parallel for schedule(dynamic) if (!opt.serial)
    for (int r = 0; r < total; ++r) {
        std::vector<Scalar> u0;
        if (r < n_extra) {
            u0 = extra_starts[static_cast<std::size_t>(r)];
        } else {
            std::mt19937_64 rng(mix_seed(opt.seed, static_cast<std::uint64_t>(r - n_extra)));
            std::normal_distribution<double> gauss(0.0, 1.0);
            u0.resize(shape.size());
            for (auto& x : u0) {
                const double re = gauss(rng);
                const double im = opt.complex_starts ? gauss(rng) : 0.0;
                x = Scalar(re, im);
            }
        }
        result.runs[static_cast<std::size_t>(r)] = power_iterate(forward, adjoint, shape, std::move(u0), opt);
    }
    for (int r = 0; r < total; ++r) {
        if (result.best_run < 0 || result.runs[static_cast<std::size_t>(r)].value > result.value) {
            result.best_run = r;
            result.value = result.runs[static_cast<std::size_t>(r)].value;
        }
    }
    result.witness = result.runs[static_cast<std::size_t>(result.best_run)].witness;
    return result;
}

}  // namespace umdlab
