#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "umdlab/multipliers.hpp"
#include "umdlab/power_method.hpp"
#include "umdlab/spaces.hpp"

namespace umdlab {

// Samples of an X-valued function on the uniform torus grid theta_n = 2 pi n / N,
// row-major over the grid (first axis slowest), point-major in memory.
struct GridField {
    int d = 1;
    int N = 1;
    SpaceSpec space;
    std::vector<Scalar> samples;

    GridField() = default;
    GridField(int d, int N, SpaceSpec space);  // zero field
    GridField(int d, int N, SpaceSpec space, std::vector<Scalar> samples);

    std::size_t points() const;
    FieldShape shape() const { return {points(), space}; }
    std::span<const Scalar> at(std::size_t point) const {
        return std::span<const Scalar>(samples).subspan(point * space.dim(), space.dim());
    }
};

std::size_t grid_points(int d, int N);

// e^{i <k, theta>} x
GridField pure_mode(int d, int N, SpaceSpec space, std::span<const int> k, std::span<const Scalar> x);

// (N^{-d} sum ||f(theta)||^p)^{1/p}
double grid_lp_norm(const GridField& f, double p);

class MultiplierOperator {
public:
    MultiplierOperator(LatticeTable table, SpaceSpec space);

    const LatticeTable& table() const { return table_; }
    const SpaceSpec& space() const { return space_; }
    int d() const { return table_.d; }
    int N() const { return table_.N; }

    // forward DFT per X-coordinate, multiply, inverse DFT; coordinates in parallel
    void apply(std::span<const Scalar> in, std::span<Scalar> out) const;
    void apply_serial(std::span<const Scalar> in, std::span<Scalar> out) const;
    GridField apply(const GridField& f) const;

    // symbol conj(m(k)): the adjoint for the pairing Re sum conj(g) h
    MultiplierOperator adjoint() const;

    // value used on DFT bin b (per axis), i.e. m at the wrapped mode
    Scalar bin_value(std::size_t flat_bin) const { return bins_[flat_bin]; }

private:
    void apply_impl(std::span<const Scalar> in, std::span<Scalar> out, bool parallel) const;

    LatticeTable table_;
    SpaceSpec space_;
    std::vector<Scalar> bins_;  // table reordered to FFT bin order
};

MultiplierOperator make_operator(const SymbolSpec& spec, int N, SpaceSpec space = SpaceSpec::scalar());

// DFT bin -> centred mode, per axis
int bin_to_mode(int bin, int N);
int mode_to_bin(int k, int N);

struct LpEstimateOptions {
    double p = 2.0;
    int restarts = 8;
    int max_iter = 500;
    double rel_tol = 1e-9;
    std::uint64_t seed = 0;
    bool serial = false;
    // pure mode and square wave at the largest-modulus lattice mode
    bool deterministic_starts = true;
    std::vector<GridField> warm_starts;
};

struct LpEstimate {
    double value = 0.0;
    GridField witness;
    std::vector<double> run_values;
    std::vector<double> history;  // best run, best ratio per accepted iteration
    int best_run = -1;
};

// Safeguarded nonlinear power method; the value is an achieved ratio, so a
// lower bound for the discrete operator norm.
LpEstimate norm_lower_bound(const MultiplierOperator& op, const LpEstimateOptions& opt);

double field_ratio(const MultiplierOperator& op, const GridField& f, double p);

// g(theta) = f(factor * theta) on the finer grid: tiles the samples. For a
// 0-homogeneous symbol the ratio is unchanged.
GridField tile_upsample(const GridField& f, int factor = 2);

// constant in a new last variable
GridField lift_dimension(const GridField& f);

GridField subtract_mean(const GridField& f);

// little-endian float64 (re, im), point-major; header carries d, N, space
void write_field_binary(const GridField& f, std::ostream& os);
GridField read_field_binary(std::istream& is, int d, int N, SpaceSpec space);
std::string field_header_json(const GridField& f, double ratio, double p);

}  // namespace umdlab
