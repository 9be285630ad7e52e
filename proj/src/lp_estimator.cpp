#include "umdlab/lp_estimator.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include "json.hpp"

namespace umdlab {

using json = nlohmann::json;

namespace {

// Planning is not thread-safe in FFTW; execution on fresh arrays is.
struct PlanCache {
    std::mutex mu;
    std::map<std::tuple<int, int, int, int>, fftw_plan> plans;

    ~PlanCache() {
        for (auto& [k, p] : plans) fftw_destroy_plan(p);
    }

    fftw_plan get(int d, int N, int stride, int sign) {
        std::lock_guard<std::mutex> lock(mu);
        const auto key = std::make_tuple(d, N, stride, sign);
        if (auto it = plans.find(key); it != plans.end()) return it->second;
        std::vector<int> n(d, N);
        const std::size_t total = grid_points(d, N) * static_cast<std::size_t>(stride);
        fftw_complex* buf = fftw_alloc_complex(total);
        fftw_plan p = fftw_plan_many_dft(d, n.data(), 1, buf, nullptr, stride, 0, buf, nullptr, stride, 0, sign,
                                         FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(buf);
        if (!p) throw std::runtime_error("fftw planning failed");
        plans.emplace(key, p);
        return p;
    }
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

fftw_complex* as_fftw(Scalar* p) { return reinterpret_cast<fftw_complex*>(p); }

// flat index -> per-axis digits, first axis slowest
void unflatten(std::size_t flat, int d, int N, std::vector<int>& digits) {
    for (int a = d - 1; a >= 0; --a) {
        digits[a] = static_cast<int>(flat % static_cast<std::size_t>(N));
        flat /= static_cast<std::size_t>(N);
    }
}

Scalar mode_phase(std::span<const int> k, std::span<const int> n, int N) {
    long long s = 0;
    for (std::size_t a = 0; a < k.size(); ++a) s += static_cast<long long>(k[a]) * n[a];
    long long r = s % N;
    if (r < 0) r += N;
    if (r == 0) return 1.0;
    if (2 * r == N) return -1.0;
    if (4 * r == N) return Scalar(0.0, 1.0);
    if (4 * r == 3 * N) return Scalar(0.0, -1.0);
    return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(r) / N);
}

}  // namespace

std::size_t grid_points(int d, int N) {
    if (d < 1 || N < 1) throw std::invalid_argument("grid needs d >= 1 and N >= 1");
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(N);
    return total;
}

GridField::GridField(int d_, int N_, SpaceSpec space_)
    : d(d_), N(N_), space(space_), samples(grid_points(d_, N_) * space_.dim()) {}

GridField::GridField(int d_, int N_, SpaceSpec space_, std::vector<Scalar> s)
    : d(d_), N(N_), space(space_), samples(std::move(s)) {
    if (samples.size() != grid_points(d, N) * space.dim()) throw std::invalid_argument("field sample count mismatch");
    for (const auto& z : samples)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw std::invalid_argument("non-finite field sample");
}

std::size_t GridField::points() const { return grid_points(d, N); }

int bin_to_mode(int bin, int N) { return bin < (N + 1) / 2 ? bin : bin - N; }
int mode_to_bin(int k, int N) { return k >= 0 ? k : k + N; }

GridField pure_mode(int d, int N, SpaceSpec space, std::span<const int> k, std::span<const Scalar> x) {
    if (static_cast<int>(k.size()) != d) throw std::invalid_argument("mode dimension mismatch");
    if (static_cast<int>(x.size()) != space.dim()) throw std::invalid_argument("vector dimension mismatch");
    GridField f(d, N, space);
    std::vector<int> n(d);
    const std::size_t dim = x.size();
    for (std::size_t i = 0; i < f.points(); ++i) {
        unflatten(i, d, N, n);
        const Scalar e = mode_phase(k, n, N);
        for (std::size_t j = 0; j < dim; ++j) f.samples[i * dim + j] = e * x[j];
    }
    return f;
}

double grid_lp_norm(const GridField& f, double p) { return field_lp_norm(f.shape(), f.samples, p); }

MultiplierOperator::MultiplierOperator(LatticeTable table, SpaceSpec space)
    : table_(std::move(table)), space_(space) {
    const std::size_t total = grid_points(table_.d, table_.N);
    if (table_.values.size() != total) throw std::invalid_argument("lattice table size mismatch");
    bins_.resize(total);
    std::vector<int> b(table_.d), k(table_.d);
    for (std::size_t i = 0; i < total; ++i) {
        unflatten(i, table_.d, table_.N, b);
        for (int a = 0; a < table_.d; ++a) k[a] = bin_to_mode(b[a], table_.N);
        bins_[i] = table_.at(k);
    }
}

void MultiplierOperator::apply_impl(std::span<const Scalar> in, std::span<Scalar> out, bool parallel) const {
    const int dim = space_.dim();
    const std::size_t pts = bins_.size();
    if (in.size() != pts * dim || out.size() != in.size())
        throw std::invalid_argument("field does not match the operator resolution");
    std::copy(in.begin(), in.end(), out.begin());
    fftw_plan fwd = plan_cache().get(table_.d, table_.N, dim, FFTW_FORWARD);
    fftw_plan bwd = plan_cache().get(table_.d, table_.N, dim, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(pts);
    Scalar* base = out.data();

#pragma omp parallel for schedule(static) if (parallel && dim > 1)
    for (int j = 0; j < dim; ++j) {
        fftw_execute_dft(fwd, as_fftw(base + j), as_fftw(base + j));
        for (std::size_t i = 0; i < pts; ++i) base[i * dim + j] *= bins_[i] * scale;
        fftw_execute_dft(bwd, as_fftw(base + j), as_fftw(base + j));
    }
}

void MultiplierOperator::apply(std::span<const Scalar> in, std::span<Scalar> out) const { apply_impl(in, out, true); }
void MultiplierOperator::apply_serial(std::span<const Scalar> in, std::span<Scalar> out) const {
    apply_impl(in, out, false);
}

GridField MultiplierOperator::apply(const GridField& f) const {
    if (f.d != table_.d || f.N != table_.N) throw std::invalid_argument("field does not match the operator resolution");
    if (!(f.space == space_)) throw std::invalid_argument("field space does not match the operator");
    GridField g(f.d, f.N, f.space);
    apply(f.samples, g.samples);
    return g;
}

MultiplierOperator MultiplierOperator::adjoint() const {
    LatticeTable t = table_;
    for (auto& v : t.values) v = std::conj(v);
    t.zero_mode = std::conj(t.zero_mode);
    t.tag = "Adjoint(" + table_.tag + ")";
    return MultiplierOperator(std::move(t), space_);
}

MultiplierOperator make_operator(const SymbolSpec& spec, int N, SpaceSpec space) {
    return MultiplierOperator(lattice_table(spec, N), space);
}

double field_ratio(const MultiplierOperator& op, const GridField& f, double p) {
    const FieldMap fwd = [&op](std::span<const Scalar> a, std::span<Scalar> b) { op.apply(a, b); };
    return rayleigh_ratio(fwd, f.shape(), f.samples, p);
}

LpEstimate norm_lower_bound(const MultiplierOperator& op, const LpEstimateOptions& opt) {
    if (!(opt.p > 1.0)) throw std::invalid_argument("norm_lower_bound needs p > 1");
    const int d = op.d(), N = op.N();
    const SpaceSpec space = op.space();
    const MultiplierOperator adj = op.adjoint();

    std::vector<std::vector<Scalar>> starts;
    bool complex_symbol = false;
    for (const auto& v : op.table().values) complex_symbol = complex_symbol || v.imag() != 0.0;

    if (opt.deterministic_starts) {
        std::size_t best = 0;
        for (std::size_t i = 0; i < op.table().values.size(); ++i)
            if (std::abs(op.table().values[i]) > std::abs(op.table().values[best])) best = i;
        std::vector<int> k(d);
        unflatten(best, d, N, k);
        for (auto& x : k) x -= N / 2;
        std::vector<Scalar> e1(space.dim(), 0.0);
        e1[0] = 1.0;
        GridField mode = pure_mode(d, N, space, k, e1);
        starts.push_back(mode.samples);
        bool nonzero = false;
        for (int x : k) nonzero = nonzero || x != 0;
        if (nonzero) {
            // square wave: sign of the real part
            for (auto& z : mode.samples)
                if (z != Scalar{}) z = z.real() >= 0.0 ? 1.0 : -1.0;
            starts.push_back(std::move(mode.samples));
        }
    }
    for (const auto& w : opt.warm_starts) {
        if (w.d != d || w.N != N || !(w.space == space)) throw std::invalid_argument("warm start does not match the operator");
        starts.push_back(w.samples);
    }

    PowerMethodOptions pm;
    pm.p = opt.p;
    pm.restarts = opt.restarts;
    pm.max_iter = opt.max_iter;
    pm.rel_tol = opt.rel_tol;
    pm.seed = opt.seed;
    pm.serial = opt.serial;
    pm.complex_starts = complex_symbol;

    const FieldMap fwd = [&op](std::span<const Scalar> a, std::span<Scalar> b) { op.apply_serial(a, b); };
    const FieldMap bwd = [&adj](std::span<const Scalar> a, std::span<Scalar> b) { adj.apply_serial(a, b); };
    const auto res = power_norm_estimate(fwd, bwd, {grid_points(d, N), space}, pm, starts);

    LpEstimate out;
    out.value = res.value;
    out.best_run = res.best_run;
    out.witness = GridField(d, N, space, res.witness);
    for (const auto& r : res.runs) out.run_values.push_back(r.value);
    out.history = res.runs[static_cast<std::size_t>(res.best_run)].history;
    return out;
}

GridField tile_upsample(const GridField& f, int factor) {
    if (factor < 1) throw std::invalid_argument("upsampling factor must be >= 1");
    const int N2 = f.N * factor;
    GridField g(f.d, N2, f.space);
    const std::size_t dim = f.space.dim();
    std::vector<int> n(f.d);
    for (std::size_t i = 0; i < g.points(); ++i) {
        unflatten(i, f.d, N2, n);
        std::size_t src = 0;
        for (int a = 0; a < f.d; ++a) src = src * f.N + static_cast<std::size_t>(n[a] % f.N);
        std::copy_n(f.samples.begin() + src * dim, dim, g.samples.begin() + i * dim);
    }
    return g;
}

GridField lift_dimension(const GridField& f) {
    GridField g(f.d + 1, f.N, f.space);
    const std::size_t dim = f.space.dim();
    const std::size_t N = static_cast<std::size_t>(f.N);
    for (std::size_t i = 0; i < f.points(); ++i)
        for (std::size_t t = 0; t < N; ++t)
            std::copy_n(f.samples.begin() + i * dim, dim, g.samples.begin() + (i * N + t) * dim);
    return g;
}

GridField subtract_mean(const GridField& f) {
    GridField g = f;
    const std::size_t dim = f.space.dim(), pts = f.points();
    for (std::size_t j = 0; j < dim; ++j) {
        Scalar m{};
        for (std::size_t i = 0; i < pts; ++i) m += f.samples[i * dim + j];
        m /= static_cast<double>(pts);
        for (std::size_t i = 0; i < pts; ++i) g.samples[i * dim + j] -= m;
    }
    return g;
}

void write_field_binary(const GridField& f, std::ostream& os) { write_complex_le(os, f.samples); }

GridField read_field_binary(std::istream& is, int d, int N, SpaceSpec space) {
    std::vector<Scalar> s(grid_points(d, N) * space.dim());
    read_complex_le(is, s);
    return GridField(d, N, space, std::move(s));
}

std::string field_header_json(const GridField& f, double ratio, double p) {
    json q = f.space.is_sup() ? json("inf") : json(f.space.exponent());
    json j{{"d", f.d}, {"N", f.N}, {"space", {{"dim", f.space.dim()}, {"q", q}}}, {"p", p}, {"ratio", ratio}};
    return j.dump();
}

}  // namespace umdlab
