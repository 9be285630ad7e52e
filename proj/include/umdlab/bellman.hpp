#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace umdlab {

// Scalar real A-Burkholder surface on the square [-L, L]^2 with A = {b, B}.
// Node (i, j) sits at (x_i, y_j), stored row-major as values[j * M + i].
struct BellmanParams {
    double p = 2.0;
    double b = -1.0;
    double B = 1.0;
    double beta = 1.0;
    double half_width = 4.0;
    int resolution = 201;  // odd
};

class BellmanGrid {
public:
    explicit BellmanGrid(const BellmanParams& params);

    const BellmanParams& params() const { return params_; }
    int size() const { return params_.resolution; }
    double spacing() const { return h_; }
    // h (i - centre), so doubling an offset doubles the coordinate exactly
    double coord(int i) const { return h_ * (i - center()); }
    int center() const { return params_.resolution / 2; }

    double& at(int i, int j) { return values_[static_cast<std::size_t>(j) * size() + i]; }
    double at(int i, int j) const { return values_[static_cast<std::size_t>(j) * size() + i]; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    // bilinear read; NaN outside the square
    double interpolate(double x, double y) const;

    // 1e10 (1 + L^p)
    double cap() const;

private:
    BellmanParams params_;
    double h_;
    std::vector<double> values_;
};

// |y|^p - beta^p |x|^p at every node.
void initial_surface(BellmanGrid& grid);

// Least concave majorant along every grid line of direction (1, eps). Integer
// and reciprocal-integer slopes walk exact nodes; other slopes sample the line
// through each node with linear reads along the crossed grid columns (or rows).
void directional_concavify(BellmanGrid& grid, double eps);
// Single-threaded reference with identical results.
void directional_concavify_serial(BellmanGrid& grid, double eps);

// Upper concave envelope of samples (t_k, v_k), t strictly increasing, read back at every t_k.
void concave_majorant(const std::vector<double>& t, std::vector<double>& v);

void bellman_step(BellmanGrid& grid);

// U is p-homogeneous, so along every chain of nodes k, 2k, 4k, ... (offsets
// from the centre) each value is raised to the best rescaled value on the
// chain: U(k) >= 2^{-mp} U(2^m k). A rescaled grid martingale is still a
// martingale pair, so the surface stays below the exact U.
void homogeneity_pass(BellmanGrid& grid);
void homogeneity_pass_serial(BellmanGrid& grid);

enum class BellmanStatus { Converged, Diverged, MaxIter };
const char* to_string(BellmanStatus s);

struct IterateOptions {
    int max_iter = 2000;
    double tol = 1e-10;
    std::optional<double> cap;        // default: grid.cap()
    std::optional<double> zero_tol;   // default: 1e-9 (1 + L^p)
    bool serial = false;
    bool rescale = true;  // homogeneity_pass after every bellman_step
};

struct IterateResult {
    BellmanStatus status = BellmanStatus::MaxIter;
    int iterations = 0;
    double last_change = 0.0;
    double origin_value = 0.0;
};

// Repeats bellman_step (plus homogeneity_pass when rescale is set) from the current values. Diverged as soon as U(0,0)
// exceeds zero_tol (chords stay inside the square, so values never blow up;
// a positive value at the origin already rules the trial beta out) or a node
// passes the cap.
IterateResult iterate(BellmanGrid& grid, const IterateOptions& options = {});

// max over on-grid points of U(x, a x), a in {b, B}
double diagonal_max(const BellmanGrid& grid);

struct ThresholdProbe {
    double beta = 0.0;
    IterateResult result;
};

struct ThresholdResult {
    double beta_hat = 0.0;
    double width = 0.0;
    ThresholdProbe lo, hi;  // last diverging and last admissible probes
    int probes = 0;
};

struct ThresholdOptions {
    double half_width = 4.0;
    int resolution = 201;
    double width = 1e-2;
    IterateOptions iterate;
};

bool admissible(const IterateResult& r);

// Bisection on trial beta. Throws std::invalid_argument when both ends
// agree. Without an explicit bracket: [max(|b|,|B|)/2, (B-b)/2 (p*-1) + |B+b|/2 + 0.05].
ThresholdResult beta_threshold(double b, double B, double p, const ThresholdOptions& options = {},
                               std::optional<std::pair<double, double>> bracket = std::nullopt);

// V(x, y) = U((x-y)/2, (a2 x - a1 y)/2) sampled on the same node set; NaN where
// the preimage leaves the square.
BellmanGrid v_transform(const BellmanGrid& u, double a1, double a2);
// U(x, y) = V((2y - 2x a1)/(a2-a1), (2y - 2x a2)/(a2-a1))
BellmanGrid back_transform(const BellmanGrid& v, double a1, double a2);

struct ConcavityReport {
    double max_violation = 0.0;
    long samples = 0;
    bool covered = false;  // (a2 c1 - a1 c2)/(c1 - c2) lies in conv{a1, a2}
};

// Midpoint test along lines of direction (c1, c2) centred at nodes, step one
// grid spacing along the normalised direction. Only centres with both
// coordinates within window * L are scanned: the chords stop at the square, so
// a boundary layer never settles. Throws when c1 == c2.
ConcavityReport directional_concavity_report(const BellmanGrid& v, double c1, double c2, double a1, double a2,
                                             double window = 1.0);

// Largest positive (f(a)+f(c))/2 - f(b) over axis-aligned node triples centred
// within window * L (sign = +1 checks concavity, -1 convexity); axis 0 runs
// along x, 1 along y.
double axis_midpoint_violation(const BellmanGrid& g, int axis, double sign, double window = 1.0);

// Largest axis second difference of the initial surface over the window: the
// scale that interpolation and lattice effects are measured against.
double curvature_tolerance(const BellmanGrid& g, double window = 1.0);

void write_surface_csv(const BellmanGrid& g, std::ostream& os);
std::string surface_metadata_json(const BellmanGrid& g, const IterateResult& r);

}  // namespace umdlab
