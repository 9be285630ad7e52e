#include "umdlab/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace umdlab {

SpaceSpec::SpaceSpec(int dim, double exponent) : dim_(dim), exponent_(exponent) {
    if (dim < 1) throw std::invalid_argument("space dimension must be >= 1, got " + std::to_string(dim));
    if (!(exponent >= 1.0)) throw std::invalid_argument("space exponent must be >= 1");
}

SpaceSpec SpaceSpec::dual() const { return SpaceSpec(dim_, dual_exponent(exponent_)); }

double dual_exponent(double q) {
    if (!(q >= 1.0)) throw std::invalid_argument("exponent must be >= 1");
    if (q == 1.0) return kInf;
    if (q == kInf) return 1.0;
    return q / (q - 1.0);
}

namespace {

double max_modulus(std::span<const Scalar> v) {
    double m = 0.0;
    for (const auto& x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

double norm(const SpaceSpec& space, std::span<const Scalar> v) {
    const double q = space.exponent();
    if (v.size() == 1) return std::abs(v[0]);
    if (q == kInf) return max_modulus(v);
    if (q == 1.0) {
        double s = 0.0;
        for (const auto& x : v) s += std::abs(x);
        return s;
    }
    if (q == 2.0) {
        double s = 0.0;
        for (const auto& x : v) s += std::norm(x);
        return std::sqrt(s);
    }
    // scale by the max modulus so large q cannot overflow
    const double m = max_modulus(v);
    if (m == 0.0) return 0.0;
    double s = 0.0;
    for (const auto& x : v) s += std::pow(std::abs(x) / m, q);
    return m * std::pow(s, 1.0 / q);
}

double norm_pow(const SpaceSpec& space, std::span<const Scalar> v, double p) {
    if (v.size() == 1) return abs_pow(v[0], p);
    const double n = norm(space, v);
    return n == 0.0 ? 0.0 : std::pow(n, p);
}

void norm_pow_subgradient(const SpaceSpec& space, std::span<const Scalar> v, double p,
                          std::span<Scalar> out) {
    if (!(p > 1.0)) throw std::invalid_argument("norm_pow_subgradient needs p > 1");
    if (out.size() != v.size()) throw std::invalid_argument("subgradient output length mismatch");
    if (v.size() == 1) {
        // p |v|^{p-2} v
        out[0] = v[0] == Scalar{} ? Scalar{} : p * abs_pow(v[0], p - 2.0) * v[0];
        return;
    }
    std::fill(out.begin(), out.end(), Scalar{});
    const double nv = norm(space, v);
    if (nv == 0.0) return;
    const double outer = p * std::pow(nv, p - 1.0);
    const double q = space.exponent();

    if (q == kInf) {
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t j = 0; j < v.size(); ++j) {
            const double a = std::abs(v[j]);
            if (a > best) {  // strict: lowest index wins ties
                best = a;
                arg = j;
            }
        }
        out[arg] = outer * (v[arg] / best);
        return;
    }
    if (q == 1.0) {
        for (std::size_t j = 0; j < v.size(); ++j) {
            const double a = std::abs(v[j]);
            if (a > 0.0) out[j] = outer * (v[j] / a);
        }
        return;
    }
    // d||v||_q / dv_j = |v_j|^{q-2} v_j / ||v||^{q-1}, computed on v / ||v||
    for (std::size_t j = 0; j < v.size(); ++j) {
        const double a = std::abs(v[j]) / nv;
        if (a > 0.0) out[j] = outer * std::pow(a, q - 2.0) * (v[j] / nv);
    }
}

double real_pairing(std::span<const Scalar> u, std::span<const Scalar> v) {
    if (u.size() != v.size()) throw std::invalid_argument("pairing length mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) s += u[j].real() * v[j].real() + u[j].imag() * v[j].imag();
    return s;
}

Vec::Vec(SpaceSpec space) : space_(space), entries_(static_cast<std::size_t>(space.dim())) {}

Vec::Vec(SpaceSpec space, std::vector<Scalar> entries) : space_(space), entries_(std::move(entries)) {
    if (entries_.size() != static_cast<std::size_t>(space_.dim()))
        throw std::invalid_argument("Vec length does not match space dimension");
    for (const auto& x : entries_)
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
            throw std::invalid_argument("Vec entries must be finite");
}

bool Vec::is_real() const {
    return std::all_of(entries_.begin(), entries_.end(), [](const Scalar& x) { return x.imag() == 0.0; });
}

Vec Vec::operator+(const Vec& other) const {
    if (!(space_ == other.space_)) throw std::invalid_argument("Vec space mismatch");
    std::vector<Scalar> r(entries_);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += other.entries_[j];
    return Vec(space_, std::move(r));
}

Vec Vec::operator-(const Vec& other) const { return *this + other * Scalar(-1.0); }

Vec Vec::operator*(Scalar a) const {
    std::vector<Scalar> r(entries_);
    for (auto& x : r) x *= a;
    return Vec(space_, std::move(r));
}

double norm(const Vec& v) { return norm(v.space(), v.entries()); }

Vec norm_pow_subgradient(const Vec& v, double p) {
    std::vector<Scalar> g(v.size());
    norm_pow_subgradient(v.space(), v.entries(), p, g);
    return Vec(v.space(), std::move(g));
}

double real_pairing(const Vec& u, const Vec& v) { return real_pairing(u.entries(), v.entries()); }

}  // namespace umdlab
