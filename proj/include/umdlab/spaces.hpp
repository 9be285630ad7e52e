#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace umdlab {

using Scalar = std::complex<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kDefaultTol = 1e-10;

// Finite-dimensional complex l^q space; q = kInf encodes l^infinity.
class SpaceSpec {
public:
    SpaceSpec() = default;
    SpaceSpec(int dim, double exponent);

    static SpaceSpec scalar() { return SpaceSpec(1, 2.0); }

    int dim() const { return dim_; }
    double exponent() const { return exponent_; }
    bool is_sup() const { return exponent_ == kInf; }

    SpaceSpec dual() const;

    bool operator==(const SpaceSpec&) const = default;

private:
    int dim_ = 1;
    double exponent_ = 2.0;
};

double dual_exponent(double q);

// Kernels over raw coordinate spans; the Vec wrapper and the grid fields
// both route through these.
double norm(const SpaceSpec& space, std::span<const Scalar> v);

// Subgradient of w -> ||w||_q^p at v, written into out (same length as v).
// Pairing convention: the directional derivative along h is Re sum conj(g_j) h_j.
void norm_pow_subgradient(const SpaceSpec& space, std::span<const Scalar> v, double p,
                          std::span<Scalar> out);

// |x|^p through the squared modulus; exact shortcuts for p = 2 and p = 4.
inline double abs_pow(Scalar x, double p) {
    const double n2 = x.real() * x.real() + x.imag() * x.imag();
    if (p == 2.0) return n2;
    if (p == 4.0) return n2 * n2;
    return n2 == 0.0 ? 0.0 : std::pow(n2, 0.5 * p);
}

// ||v||^p
double norm_pow(const SpaceSpec& space, std::span<const Scalar> v, double p);

// Re sum conj(u_j) v_j
double real_pairing(std::span<const Scalar> u, std::span<const Scalar> v);

class Vec {
public:
    explicit Vec(SpaceSpec space);
    Vec(SpaceSpec space, std::vector<Scalar> entries);

    const SpaceSpec& space() const { return space_; }
    std::span<const Scalar> entries() const { return entries_; }
    const Scalar& operator[](std::size_t i) const { return entries_[i]; }
    std::size_t size() const { return entries_.size(); }
    bool is_real() const;

    Vec operator+(const Vec& other) const;
    Vec operator-(const Vec& other) const;
    Vec operator*(Scalar a) const;

private:
    SpaceSpec space_;
    std::vector<Scalar> entries_;
};

double norm(const Vec& v);
Vec norm_pow_subgradient(const Vec& v, double p);
double real_pairing(const Vec& u, const Vec& v);

}  // namespace umdlab
