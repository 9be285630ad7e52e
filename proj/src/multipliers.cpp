#include "umdlab/multipliers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace umdlab {

namespace {

using json = nlohmann::json;

void need(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

void check_alpha(double alpha) { need(alpha > 0.0 && alpha <= 2.0, "alpha must lie in (0, 2]"); }

void check_sphere(int d, const std::vector<SphereAtom>& atoms) {
    for (const auto& a : atoms) {
        need(static_cast<int>(a.theta.size()) == d, "sphere atom dimension mismatch");
        double n2 = 0.0;
        for (double t : a.theta) n2 += t * t;
        need(std::abs(std::sqrt(n2) - 1.0) <= 1e-12, "sphere atom theta must be a unit vector");
        need(a.mass > 0.0, "atom mass must be positive");
        need(std::isfinite(a.psi.real()) && std::isfinite(a.psi.imag()), "psi must be finite");
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
    return s;
}

bool all_zero(std::span<const double> xi) {
    return std::all_of(xi.begin(), xi.end(), [](double x) { return x == 0.0; });
}

// ln(1 + e^x) without overflow
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

// LU with partial pivoting: determinant and inverse (for the condition estimate)
bool invert(const std::vector<double>& S, int d, double& det, std::vector<double>& inv) {
    std::vector<double> a(S);
    inv.assign(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i) inv[i * d + i] = 1.0;
    det = 1.0;
    for (int c = 0; c < d; ++c) {
        int piv = c;
        for (int r = c + 1; r < d; ++r)
            if (std::abs(a[r * d + c]) > std::abs(a[piv * d + c])) piv = r;
        if (a[piv * d + c] == 0.0) {
            det = 0.0;
            return false;
        }
        if (piv != c) {
            for (int k = 0; k < d; ++k) {
                std::swap(a[piv * d + k], a[c * d + k]);
                std::swap(inv[piv * d + k], inv[c * d + k]);
            }
            det = -det;
        }
        const double p = a[c * d + c];
        det *= p;
        for (int k = 0; k < d; ++k) {
            a[c * d + k] /= p;
            inv[c * d + k] /= p;
        }
        for (int r = 0; r < d; ++r) {
            if (r == c) continue;
            const double f = a[r * d + c];
            if (f == 0.0) continue;
            for (int k = 0; k < d; ++k) {
                a[r * d + k] -= f * a[c * d + k];
                inv[r * d + k] -= f * inv[c * d + k];
            }
        }
    }
    return true;
}

double max_row_sum(const std::vector<double>& m, int d) {
    double best = 0.0;
    for (int r = 0; r < d; ++r) {
        double s = 0.0;
        for (int c = 0; c < d; ++c) s += std::abs(m[r * d + c]);
        best = std::max(best, s);
    }
    return best;
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

SymbolSpec SymbolSpec::power_quotient(double alpha, std::vector<Scalar> a) {
    check_alpha(alpha);
    need(!a.empty(), "power quotient needs d >= 1 coefficients");
    return SymbolSpec(std::make_shared<SymbolNode>(SymbolNode{PowerQuotient{static_cast<int>(a.size()), alpha, std::move(a)}}));
}

SymbolSpec SymbolSpec::spherical_power(int d, double alpha, std::vector<SphereAtom> atoms) {
    need(d >= 1, "dimension must be >= 1");
    check_alpha(alpha);
    need(!atoms.empty(), "spherical power needs at least one atom");
    check_sphere(d, atoms);
    return SymbolSpec(std::make_shared<SymbolNode>(SymbolNode{SphericalPower{d, alpha, std::move(atoms)}}));
}

SymbolSpec SymbolSpec::banuelos_bogdan(int d, std::vector<LevyAtom> levy, std::vector<SphereAtom> sphere) {
    need(d >= 1, "dimension must be >= 1");
    need(!levy.empty() || !sphere.empty(), "Banuelos-Bogdan symbol needs at least one atom");
    check_sphere(d, sphere);
    for (const auto& a : levy) {
        need(static_cast<int>(a.z.size()) == d, "Levy atom dimension mismatch");
        need(!all_zero(a.z), "Levy atoms must be nonzero");
        need(a.mass > 0.0, "atom mass must be positive");
    }
    return SymbolSpec(std::make_shared<SymbolNode>(SymbolNode{BanuelosBogdan{d, std::move(levy), std::move(sphere)}}));
}

SymbolSpec SymbolSpec::beurling_ahlfors() {
    return SymbolSpec(std::make_shared<SymbolNode>(SymbolNode{BeurlingAhlfors{}}));
}

SymbolSpec SymbolSpec::log_quotient(int d, std::vector<SphereAtom> atoms) {
    need(d >= 1, "dimension must be >= 1");
    need(!atoms.empty(), "log quotient needs at least one atom");
    check_sphere(d, atoms);
    return SymbolSpec(std::make_shared<SymbolNode>(SymbolNode{LogQuotient{d, std::move(atoms)}}));
}

SymbolSpec SymbolSpec::shifted_power(int d, double alpha, double c) {
    need(d >= 1, "dimension must be >= 1");
    check_alpha(alpha);
    need(c >= 0.0 && std::isfinite(c), "shift c must be >= 0");
    return SymbolSpec(std::make_shared<SymbolNode>(SymbolNode{ShiftedPower{d, alpha, c}}));
}

SymbolSpec SymbolSpec::kappa_quotient(double u, double v, Scalar a1, Scalar a2) {
    need(u >= 0.0 && u < v && v <= 2.0, "kappa quotient needs 0 <= u < v <= 2");
    return SymbolSpec(std::make_shared<SymbolNode>(SymbolNode{KappaQuotient{u, v, a1, a2}}));
}

SymbolSpec SymbolSpec::counterexample(int d) {
    need(d >= 2, "counterexample needs d >= 2");
    return SymbolSpec(std::make_shared<SymbolNode>(SymbolNode{Counterexample{d}}));
}

SymbolSpec SymbolSpec::compose(std::vector<double> S) const {
    const int d = dim();
    need(static_cast<int>(S.size()) == d * d, "S must be d x d");
    double det;
    std::vector<double> inv;
    const bool ok = invert(S, d, det, inv);
    const double cond = ok ? max_row_sum(S, d) * max_row_sum(inv, d) : INFINITY;
    need(ok && std::abs(det) > 1e-12 && cond < 1e12, "S must be invertible (singular or ill-conditioned matrix)");
    return SymbolSpec(std::make_shared<SymbolNode>(SymbolNode{Composed{*this, std::move(S)}}));
}

SymbolSpec SymbolSpec::pad(int d2) const {
    need(d2 > dim(), "padding needs a larger dimension");
    return SymbolSpec(std::make_shared<SymbolNode>(SymbolNode{Padded{*this, d2}}));
}

SymbolSpec SymbolSpec::plus_constant(Scalar c) const {
    return SymbolSpec(std::make_shared<SymbolNode>(SymbolNode{PlusConstant{*this, c}}));
}

int SymbolSpec::dim() const {
    return std::visit(overloaded{[](const PowerQuotient& s) { return s.d; },
                                 [](const SphericalPower& s) { return s.d; },
                                 [](const BanuelosBogdan& s) { return s.d; },
                                 [](const BeurlingAhlfors&) { return 2; },
                                 [](const LogQuotient& s) { return s.d; },
                                 [](const ShiftedPower& s) { return s.d; },
                                 [](const KappaQuotient&) { return 2; },
                                 [](const Counterexample& s) { return s.d; },
                                 [](const Composed& s) { return s.base.dim(); },
                                 [](const Padded& s) { return s.d; },
                                 [](const PlusConstant& s) { return s.base.dim(); }},
                      node_->v);
}

std::string SymbolSpec::tag() const {
    static const char* names[] = {"PowerQuotient", "SphericalPower", "BanuelosBogdan", "BeurlingAhlfors",
                                  "LogQuotient",   "ShiftedPower",   "KappaQuotient",  "Counterexample",
                                  "Composed",      "Padded",         "PlusConstant"};
    return names[node_->v.index()];
}

double SymbolSpec::modulus_bound() const {
    auto max_psi = [](const std::vector<SphereAtom>& atoms) {
        double m = 0.0;
        for (const auto& a : atoms) m = std::max(m, std::abs(a.psi));
        return m;
    };
    return std::visit(overloaded{[](const PowerQuotient& s) {
                                     double m = 0.0;
                                     for (auto a : s.a) m = std::max(m, std::abs(a));
                                     return m;
                                 },
                                 [&](const SphericalPower& s) { return max_psi(s.atoms); },
                                 [&](const BanuelosBogdan& s) {
                                     double m = max_psi(s.sphere);
                                     for (const auto& a : s.levy) m = std::max(m, std::abs(a.phi));
                                     return m;
                                 },
                                 [](const BeurlingAhlfors&) { return 1.0; },
                                 [&](const LogQuotient& s) { return max_psi(s.atoms); },
                                 [](const ShiftedPower&) { return 1.0; },
                                 [](const KappaQuotient& s) { return std::max(std::abs(s.a1), std::abs(s.a2)); },
                                 [](const Counterexample&) { return 1.0; },
                                 [](const Composed& s) { return s.base.modulus_bound(); },
                                 [](const Padded& s) { return s.base.modulus_bound(); },
                                 [](const PlusConstant& s) { return s.base.modulus_bound() + std::abs(s.c); }},
                      node_->v);
}

bool SymbolSpec::is_even() const { return true; }

bool SymbolSpec::is_homogeneous() const {
    return std::visit(overloaded{[](const BanuelosBogdan& s) { return s.levy.empty(); },
                                 [](const LogQuotient&) { return false; },
                                 [](const ShiftedPower& s) { return s.c == 0.0; },
                                 [](const Composed& s) { return s.base.is_homogeneous(); },
                                 [](const Padded& s) { return s.base.is_homogeneous(); },
                                 [](const PlusConstant& s) { return s.base.is_homogeneous(); },
                                 [](const auto&) { return true; }},
                      node_->v);
}

double kappa_weight(double t, double u, double v) {
    if (t == 0.0) return 1.0;
    if (std::isinf(t)) return 0.0;
    const double s = std::log(t);
    if (std::abs(s) < 1e-4) {
        // 1/(1+e^{a s}) = 1/2 - a s/4 + (a s)^3/48 - ..., averaged over a in (u, v]
        return 0.5 - s * (u + v) / 8.0 + s * s * s * (u + v) * (u * u + v * v) / 192.0;
    }
    // antiderivative of 1/(1+t^a) in a is a - log(1+t^a)/log t
    return 1.0 - (softplus(v * s) - softplus(u * s)) / ((v - u) * s);
}

namespace {

Scalar eval_node(const SymbolSpec& spec, std::span<const double> xi);

Scalar quotient(Scalar num, double den) { return den == 0.0 ? Scalar{} : num / den; }

// atoms whose weight is infinite (xi.theta = 0) take over: mass-weighted mean of psi
Scalar log_quotient_eval(const LogQuotient& s, std::span<const double> xi) {
    Scalar num_inf{}, num{};
    double den_inf = 0.0, den = 0.0;
    for (const auto& a : s.atoms) {
        const double t = dot(xi, a.theta);
        if (t == 0.0) {
            num_inf += a.mass * a.psi;
            den_inf += a.mass;
        } else {
            const double w = std::log1p(1.0 / (t * t)) * a.mass;
            num += w * a.psi;
            den += w;
        }
    }
    if (den_inf > 0.0) return num_inf / den_inf;
    return quotient(num, den);
}

Scalar eval_node(const SymbolSpec& spec, std::span<const double> xi) {
    return std::visit(
        overloaded{
            [&](const PowerQuotient& s) -> Scalar {
                double den = 0.0;
                thread_local std::vector<double> w;
                w.resize(xi.size());
                for (std::size_t j = 0; j < xi.size(); ++j) {
                    w[j] = std::pow(std::abs(xi[j]), s.alpha);
                    den += w[j];
                }
                if (den == 0.0) return {};
                Scalar out{};
                for (std::size_t j = 0; j < xi.size(); ++j) out += (w[j] / den) * s.a[j];
                return out;
            },
            [&](const SphericalPower& s) -> Scalar {
                Scalar num{};
                double den = 0.0;
                for (const auto& a : s.atoms) {
                    const double w = std::pow(std::abs(dot(xi, a.theta)), s.alpha) * a.mass;
                    num += w * a.psi;
                    den += w;
                }
                return quotient(num, den);
            },
            [&](const BanuelosBogdan& s) -> Scalar {
                Scalar num{};
                double den = 0.0;
                for (const auto& a : s.levy) {
                    const double w = (1.0 - std::cos(dot(xi, a.z))) * a.mass;
                    num += w * a.phi;
                    den += w;
                }
                for (const auto& a : s.sphere) {
                    const double t = dot(xi, a.theta);
                    const double w = 0.5 * t * t * a.mass;
                    num += w * a.psi;
                    den += w;
                }
                return quotient(num, den);
            },
            [&](const BeurlingAhlfors&) -> Scalar {
                const Scalar z(xi[0], xi[1]);
                if (z == Scalar{}) return {};
                return std::conj(z) / z;
            },
            [&](const LogQuotient& s) -> Scalar { return log_quotient_eval(s, xi); },
            [&](const ShiftedPower& s) -> Scalar {
                double den = s.c;
                for (double x : xi) den += std::pow(std::abs(x), s.alpha);
                return quotient(std::pow(std::abs(xi[0]), s.alpha), den);
            },
            [&](const KappaQuotient& s) -> Scalar {
                const double x1 = std::abs(xi[0]), x2 = std::abs(xi[1]);
                if (x1 == 0.0 && x2 == 0.0) return {};
                const double w1 = x1 == 0.0 ? 0.0 : kappa_weight(x2 / x1, s.u, s.v);
                return w1 * s.a1 + (1.0 - w1) * s.a2;
            },
            [&](const Counterexample& s) -> Scalar {
                const double first = xi[0], last = xi[s.d - 1];
                if (first == 0.0 || last == 0.0) return {};
                double r2 = 0.0;
                for (double x : xi) r2 += x * x;
                const double phase = r2 / (last * last);
                return std::polar(1.0, phase);
            },
            [&](const Composed& s) -> Scalar {
                const std::size_t d = xi.size();
                std::vector<double> y(d, 0.0);
                for (std::size_t r = 0; r < d; ++r)
                    for (std::size_t c = 0; c < d; ++c) y[r] += s.S[r * d + c] * xi[c];
                return eval_node(s.base, y);
            },
            [&](const Padded& s) -> Scalar {
                return eval_node(s.base, xi.subspan(0, static_cast<std::size_t>(s.base.dim())));
            },
            [&](const PlusConstant& s) -> Scalar { return eval_node(s.base, xi) + s.c; }},
        spec.node().v);
}

}  // namespace

Scalar eval(const SymbolSpec& spec, std::span<const double> xi) {
    if (static_cast<int>(xi.size()) != spec.dim())
        throw std::invalid_argument("eval: expected " + std::to_string(spec.dim()) + " coordinates, got " +
                                    std::to_string(xi.size()));
    return eval_node(spec, xi);
}

SymbolReport validate(const SymbolSpec& spec, int samples, std::uint64_t seed, double tol) {
    if (samples < 1) throw std::invalid_argument("validate needs samples >= 1");
    const int d = spec.dim();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> xi(d), tmp(d);
    std::vector<Scalar> range;
    SymbolReport rep;
    for (int s = 0; s < samples; ++s) {
        for (auto& x : xi) x = g(rng);
        const Scalar m = eval(spec, xi);
        range.push_back(m);
        for (int j = 0; j < d; ++j) tmp[j] = -xi[j];
        rep.even_defect = std::max(rep.even_defect, std::abs(eval(spec, tmp) - m));
        for (double c : {0.5, 2.0, 10.0}) {
            for (int j = 0; j < d; ++j) tmp[j] = c * xi[j];
            rep.homogeneity_defect = std::max(rep.homogeneity_defect, std::abs(eval(spec, tmp) - m));
        }
    }
    rep.even = rep.even_defect <= tol;
    rep.homogeneous = rep.homogeneity_defect <= tol;
    rep.range_hull = convex_hull(PointSet(range));
    return rep;
}

std::size_t LatticeTable::index(std::span<const int> k) const {
    if (static_cast<int>(k.size()) != d) throw std::invalid_argument("lattice index dimension mismatch");
    std::size_t idx = 0;
    const int lo = N / 2;
    for (int a = 0; a < d; ++a) {
        const int c = k[a] + lo;
        if (c < 0 || c >= N) throw std::out_of_range("lattice index outside the table");
        idx = idx * N + static_cast<std::size_t>(c);
    }
    return idx;
}

namespace {

double radical_inverse(std::uint64_t i, unsigned base) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
        f /= base;
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

LatticeTable lattice_impl(const SymbolSpec& spec, int N, bool parallel) {
    if (N < 2) throw std::invalid_argument("lattice resolution must be >= 2");
    const int d = spec.dim();
    LatticeTable t;
    t.d = d;
    t.N = N;
    t.tag = spec.tag();
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(N);
    t.values.resize(total);
    const int lo = N / 2;
    const long n = static_cast<long>(total);
#pragma omp parallel if (parallel)
    {
        std::vector<double> xi(d);
#pragma omp for schedule(static)
        for (long flat = 0; flat < n; ++flat) {
            std::size_t rest = static_cast<std::size_t>(flat);
            for (int a = d - 1; a >= 0; --a) {
                xi[a] = static_cast<double>(static_cast<int>(rest % N) - lo);
                rest /= N;
            }
            t.values[flat] = eval_node(spec, xi);
        }
    }
    t.zero_mode = ball_average(spec);
    std::vector<int> zero(d, 0);
    t.values[t.index(zero)] = t.zero_mode;
    return t;
}

}  // namespace

Scalar ball_average(const SymbolSpec& spec, int points) {
    const int d = spec.dim();
    if (d > static_cast<int>(std::size(kPrimes))) throw std::invalid_argument("ball average supports d <= 16");
    std::vector<double> xi(d);
    Scalar sum{};
    int kept = 0;
    for (std::uint64_t i = 1; kept < points; ++i) {
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) {
            xi[a] = 2.0 * radical_inverse(i, kPrimes[a]) - 1.0;
            r2 += xi[a] * xi[a];
        }
        if (r2 > 1.0) continue;
        sum += eval_node(spec, xi);
        ++kept;
    }
    return sum / static_cast<double>(points);
}

LatticeTable lattice_table(const SymbolSpec& spec, int N) { return lattice_impl(spec, N, true); }
LatticeTable lattice_table_serial(const SymbolSpec& spec, int N) { return lattice_impl(spec, N, false); }

namespace {

void put_le(std::ostream& os, double x) {
    std::uint64_t u;
    std::memcpy(&u, &x, 8);
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
    char b[8];
    std::memcpy(b, &u, 8);
    os.write(b, 8);
}

double get_le(std::istream& is) {
    char b[8];
    if (!is.read(b, 8)) throw std::runtime_error("truncated binary data");
    std::uint64_t u;
    std::memcpy(&u, b, 8);
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
    double x;
    std::memcpy(&x, &u, 8);
    return x;
}

}  // namespace

void write_complex_le(std::ostream& os, std::span<const Scalar> v) {
    for (const auto& z : v) {
        put_le(os, z.real());
        put_le(os, z.imag());
    }
}

void read_complex_le(std::istream& is, std::span<Scalar> v) {
    for (auto& z : v) {
        const double re = get_le(is);
        z = Scalar(re, get_le(is));
    }
}

void write_table_binary(const LatticeTable& t, std::ostream& os) { write_complex_le(os, t.values); }

LatticeTable read_table_binary(std::istream& is, int d, int N) {
    LatticeTable t;
    t.d = d;
    t.N = N;
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(N);
    t.values.resize(total);
    read_complex_le(is, t.values);
    std::vector<int> zero(d, 0);
    t.zero_mode = t.values[t.index(zero)];
    return t;
}

namespace {

json scalar_json(Scalar z) {
    if (z.imag() == 0.0) return z.real();
    return json::array({z.real(), z.imag()});
}

Scalar scalar_from(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
    throw std::invalid_argument("scalar must be a number or [re, im]");
}

json sphere_json(const std::vector<SphereAtom>& atoms) {
    json a = json::array();
    for (const auto& s : atoms) a.push_back({{"theta", s.theta}, {"mass", s.mass}, {"psi", scalar_json(s.psi)}});
    return a;
}

std::vector<SphereAtom> sphere_from(const json& j) {
    std::vector<SphereAtom> out;
    for (const auto& s : j)
        out.push_back({s.at("theta").get<std::vector<double>>(), s.value("mass", 1.0), scalar_from(s.at("psi"))});
    return out;
}

json spec_json(const SymbolSpec& spec) {
    json j = std::visit(
        overloaded{
            [](const PowerQuotient& s) -> json {
                json a = json::array();
                for (auto z : s.a) a.push_back(scalar_json(z));
                return {{"alpha", s.alpha}, {"a", a}};
            },
            [](const SphericalPower& s) -> json {
                return {{"d", s.d}, {"alpha", s.alpha}, {"sphere_atoms", sphere_json(s.atoms)}};
            },
            [](const BanuelosBogdan& s) -> json {
                json l = json::array();
                for (const auto& a : s.levy) l.push_back({{"z", a.z}, {"mass", a.mass}, {"phi", scalar_json(a.phi)}});
                return {{"d", s.d}, {"levy_atoms", l}, {"sphere_atoms", sphere_json(s.sphere)}};
            },
            [](const BeurlingAhlfors&) -> json { return json::object(); },
            [](const LogQuotient& s) -> json { return {{"d", s.d}, {"sphere_atoms", sphere_json(s.atoms)}}; },
            [](const ShiftedPower& s) -> json { return {{"d", s.d}, {"alpha", s.alpha}, {"c", s.c}}; },
            [](const KappaQuotient& s) -> json {
                return {{"u", s.u}, {"v", s.v}, {"a1", scalar_json(s.a1)}, {"a2", scalar_json(s.a2)}};
            },
            [](const Counterexample& s) -> json { return {{"d", s.d}}; },
            [](const Composed& s) -> json { return {{"base", spec_json(s.base)}, {"S", s.S}}; },
            [](const Padded& s) -> json { return {{"base", spec_json(s.base)}, {"d", s.d}}; },
            [](const PlusConstant& s) -> json { return {{"base", spec_json(s.base)}, {"c", scalar_json(s.c)}}; }},
        spec.node().v);
    j["tag"] = spec.tag();
    return j;
}

SymbolSpec spec_from(const json& j) {
    const std::string tag = j.at("tag").get<std::string>();
    if (tag == "PowerQuotient") {
        std::vector<Scalar> a;
        for (const auto& z : j.at("a")) a.push_back(scalar_from(z));
        return SymbolSpec::power_quotient(j.at("alpha").get<double>(), a);
    }
    if (tag == "SphericalPower")
        return SymbolSpec::spherical_power(j.at("d").get<int>(), j.at("alpha").get<double>(),
                                           sphere_from(j.at("sphere_atoms")));
    if (tag == "BanuelosBogdan") {
        std::vector<LevyAtom> levy;
        for (const auto& a : j.value("levy_atoms", json::array()))
            levy.push_back({a.at("z").get<std::vector<double>>(), a.value("mass", 1.0), scalar_from(a.at("phi"))});
        return SymbolSpec::banuelos_bogdan(j.at("d").get<int>(), levy,
                                           sphere_from(j.value("sphere_atoms", json::array())));
    }
    if (tag == "BeurlingAhlfors") return SymbolSpec::beurling_ahlfors();
    if (tag == "LogQuotient") return SymbolSpec::log_quotient(j.at("d").get<int>(), sphere_from(j.at("sphere_atoms")));
    if (tag == "ShiftedPower")
        return SymbolSpec::shifted_power(j.at("d").get<int>(), j.at("alpha").get<double>(), j.at("c").get<double>());
    if (tag == "KappaQuotient")
        return SymbolSpec::kappa_quotient(j.at("u").get<double>(), j.at("v").get<double>(), scalar_from(j.at("a1")),
                                          scalar_from(j.at("a2")));
    if (tag == "Counterexample") return SymbolSpec::counterexample(j.at("d").get<int>());
    if (tag == "Composed") return spec_from(j.at("base")).compose(j.at("S").get<std::vector<double>>());
    if (tag == "Padded") return spec_from(j.at("base")).pad(j.at("d").get<int>());
    if (tag == "PlusConstant") return spec_from(j.at("base")).plus_constant(scalar_from(j.at("c")));
    throw std::invalid_argument("unknown symbol tag '" + tag + "'");
}

}  // namespace

std::string table_header_json(const LatticeTable& t) {
    return json{{"d", t.d}, {"N", t.N}, {"tag", t.tag}, {"zero_mode", {t.zero_mode.real(), t.zero_mode.imag()}}}
        .dump();
}

std::string to_json(const SymbolSpec& spec) { return spec_json(spec).dump(); }

SymbolSpec symbol_from_json(const std::string& text) {
    try {
        return spec_from(json::parse(text));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("bad symbol json: ") + e.what());
    }
}

}  // namespace umdlab
