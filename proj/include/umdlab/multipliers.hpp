#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "umdlab/spaces.hpp"
#include "umdlab/symbol_sets.hpp"

namespace umdlab {

struct SphereAtom {
    std::vector<double> theta;  // unit vector
    double mass = 1.0;
    Scalar psi;
};

struct LevyAtom {
    std::vector<double> z;  // nonzero
    double mass = 1.0;
    Scalar phi;
};

struct SymbolNode;

// Immutable symbol description; cheap to copy (shared node).
class SymbolSpec {
public:
    // (sum a_j |xi_j|^alpha) / (sum |xi_j|^alpha)
    static SymbolSpec power_quotient(double alpha, std::vector<Scalar> a);
    // sum |xi.theta|^alpha psi mu / sum |xi.theta|^alpha mu
    static SymbolSpec spherical_power(int d, double alpha, std::vector<SphereAtom> atoms);
    // Levy part (1 - cos(xi.z)) phi V plus sphere part (xi.theta)^2 psi mu / 2, over the same without phi, psi
    static SymbolSpec banuelos_bogdan(int d, std::vector<LevyAtom> levy, std::vector<SphereAtom> sphere);
    // conj(z)/z with z = xi_1 + i xi_2
    static SymbolSpec beurling_ahlfors();
    // weights log(1 + (xi.theta)^{-2})
    static SymbolSpec log_quotient(int d, std::vector<SphereAtom> atoms);
    // |xi_1|^alpha / (c + sum |xi_j|^alpha)
    static SymbolSpec shifted_power(int d, double alpha, double c);
    // uniform average over alpha in (u, v] of the two-term power quotient, d = 2
    static SymbolSpec kappa_quotient(double u, double v, Scalar a1, Scalar a2);
    // exp(i |xi|^2 / xi_d^2) when xi_1 != 0 and xi_d != 0, else 0
    static SymbolSpec counterexample(int d);

    SymbolSpec compose(std::vector<double> S) const;  // xi -> m(S xi), S row-major d x d
    SymbolSpec pad(int d2) const;                     // m on the first d coordinates
    SymbolSpec plus_constant(Scalar c) const;

    int dim() const;
    std::string tag() const;
    const SymbolNode& node() const { return *node_; }

    // analytic sup |m|
    double modulus_bound() const;
    // structural flags; validate() checks them numerically
    bool is_even() const;
    bool is_homogeneous() const;

private:
    explicit SymbolSpec(std::shared_ptr<const SymbolNode> n) : node_(std::move(n)) {}
    std::shared_ptr<const SymbolNode> node_;
};

struct PowerQuotient {
    int d;
    double alpha;
    std::vector<Scalar> a;
};
struct SphericalPower {
    int d;
    double alpha;
    std::vector<SphereAtom> atoms;
};
struct BanuelosBogdan {
    int d;
    std::vector<LevyAtom> levy;
    std::vector<SphereAtom> sphere;
};
struct BeurlingAhlfors {};
struct LogQuotient {
    int d;
    std::vector<SphereAtom> atoms;
};
struct ShiftedPower {
    int d;
    double alpha;
    double c;
};
struct KappaQuotient {
    double u, v;
    Scalar a1, a2;
};
struct Counterexample {
    int d;
};
struct Composed {
    SymbolSpec base;
    std::vector<double> S;
};
struct Padded {
    SymbolSpec base;
    int d;
};
struct PlusConstant {
    SymbolSpec base;
    Scalar c;
};

struct SymbolNode {
    std::variant<PowerQuotient, SphericalPower, BanuelosBogdan, BeurlingAhlfors, LogQuotient, ShiftedPower,
                 KappaQuotient, Counterexample, Composed, Padded, PlusConstant>
        v;
};

// Throws std::invalid_argument on dimension mismatch. c/0 = 0.
Scalar eval(const SymbolSpec& spec, std::span<const double> xi);

// weight of a1 in the KappaQuotient at t = |xi_2|/|xi_1|: mean over alpha in (u, v] of 1/(1 + t^alpha)
double kappa_weight(double t, double u, double v);

struct SymbolReport {
    bool even = false;
    bool homogeneous = false;
    ConvexRegion range_hull;
    double even_defect = 0.0;
    double homogeneity_defect = 0.0;
};

SymbolReport validate(const SymbolSpec& spec, int samples, std::uint64_t seed, double tol = 1e-9);

struct LatticeTable {
    int d = 0;
    int N = 0;
    // m(k) for k in [-floor(N/2), ceil(N/2))^d, row-major, first axis slowest;
    // the k = 0 entry holds zero_mode
    std::vector<Scalar> values;
    Scalar zero_mode;
    std::string tag;

    std::size_t size() const { return values.size(); }
    // centred index -> flat position
    std::size_t index(std::span<const int> k) const;
    Scalar at(std::span<const int> k) const { return values[index(k)]; }
};

inline constexpr int kBallPoints = 10000;

// Quasi-uniform average over the unit ball (Halton points, rejection from the cube).
Scalar ball_average(const SymbolSpec& spec, int points = kBallPoints);

LatticeTable lattice_table(const SymbolSpec& spec, int N);
LatticeTable lattice_table_serial(const SymbolSpec& spec, int N);

// little-endian float64 (re, im) pairs
void write_complex_le(std::ostream& os, std::span<const Scalar> v);
void read_complex_le(std::istream& is, std::span<Scalar> v);

// row-major
void write_table_binary(const LatticeTable& t, std::ostream& os);
LatticeTable read_table_binary(std::istream& is, int d, int N);
std::string table_header_json(const LatticeTable& t);

// tag + parameters; scalars are numbers or [re, im]
std::string to_json(const SymbolSpec& spec);
SymbolSpec symbol_from_json(const std::string& text);

}  // namespace umdlab
