#include "umdlab/bellman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "umdlab/symbol_sets.hpp"

namespace umdlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kSlopeSnap = 1e-12;

}  // namespace

BellmanGrid::BellmanGrid(const BellmanParams& params) : params_(params) {
    if (!(params.p > 1.0)) throw std::invalid_argument("bellman grid needs p > 1");
    if (!(params.half_width > 0.0)) throw std::invalid_argument("half width must be positive");
    if (params.resolution < 3 || params.resolution % 2 == 0)
        throw std::invalid_argument("resolution must be odd and >= 3");
    if (!(params.b < params.B)) throw std::invalid_argument("need b < B");
    if (!(params.beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
    h_ = 2.0 * params.half_width / (params.resolution - 1);
    values_.assign(static_cast<std::size_t>(params.resolution) * params.resolution, 0.0);
}

double BellmanGrid::cap() const { return 1e10 * (1.0 + std::pow(params_.half_width, params_.p)); }

double BellmanGrid::interpolate(double x, double y) const {
    const double L = params_.half_width;
    const double eps = 1e-12 * L;
    if (!(x >= -L - eps && x <= L + eps && y >= -L - eps && y <= L + eps)) return kNaN;
    const int M = size();
    const double u = std::clamp((x + L) / h_, 0.0, double(M - 1));
    const double w = std::clamp((y + L) / h_, 0.0, double(M - 1));
    const int i = std::min(static_cast<int>(u), M - 2);
    const int j = std::min(static_cast<int>(w), M - 2);
    const double s = u - i, t = w - j;
    return (1 - s) * (1 - t) * at(i, j) + s * (1 - t) * at(i + 1, j) + (1 - s) * t * at(i, j + 1) +
           s * t * at(i + 1, j + 1);
}

void initial_surface(BellmanGrid& grid) {
    const auto& pr = grid.params();
    const double bp = std::pow(pr.beta, pr.p);
    const int M = grid.size();
    for (int j = 0; j < M; ++j)
        for (int i = 0; i < M; ++i)
            grid.at(i, j) = std::pow(std::abs(grid.coord(j)), pr.p) - bp * std::pow(std::abs(grid.coord(i)), pr.p);
    // the centre node is exactly (0,0)
    grid.at(grid.center(), grid.center()) = 0.0;
}

void concave_majorant(const std::vector<double>& t, std::vector<double>& v) {
    const std::size_t n = t.size();
    if (n < 3) return;
    thread_local std::vector<std::size_t> hull;
    hull.clear();
    for (std::size_t k = 0; k < n; ++k) {
        while (hull.size() >= 2) {
            const std::size_t a = hull[hull.size() - 2], b = hull.back();
            // drop b when it is on or under the chord a -> k
            if ((v[b] - v[a]) * (t[k] - t[a]) <= (v[k] - v[a]) * (t[b] - t[a]))
                hull.pop_back();
            else
                break;
        }
        hull.push_back(k);
    }
    std::size_t seg = 0;
    for (std::size_t k = 0; k < n; ++k) {
        while (seg + 1 < hull.size() && hull[seg + 1] < k) ++seg;
        if (seg + 1 >= hull.size()) break;
        const std::size_t a = hull[seg], b = hull[seg + 1];
        if (k == a || k == b) continue;
        const double lam = (t[k] - t[a]) / (t[b] - t[a]);
        const double chord = v[a] + lam * (v[b] - v[a]);
        v[k] = std::max(v[k], chord);
    }
}

namespace {

struct Step {
    int dc, dr;
};

// exact node walk when eps or 1/eps is an integer
std::optional<Step> lattice_step(double eps) {
    const double r = std::round(eps);
    if (std::abs(eps - r) <= kSlopeSnap) return Step{1, static_cast<int>(r)};
    if (eps != 0.0) {
        const double inv = 1.0 / eps;
        const double k = std::round(inv);
        if (std::abs(inv - k) <= kSlopeSnap * std::max(1.0, std::abs(inv)) && k != 0.0)
            return Step{static_cast<int>(std::abs(k)), k > 0 ? 1 : -1};
    }
    return std::nullopt;
}

std::vector<std::pair<int, int>> line_starts(int M, Step s) {
    std::vector<std::pair<int, int>> out;
    for (int r = 0; r < M; ++r)
        for (int c = 0; c < M; ++c) {
            const int pc = c - s.dc, pr = r - s.dr;
            if (pc < 0 || pr < 0 || pr >= M) out.emplace_back(c, r);
        }
    return out;
}

void walk_line(BellmanGrid& g, Step s, int c0, int r0, std::vector<double>& t, std::vector<double>& v) {
    const int M = g.size();
    t.clear();
    v.clear();
    for (int c = c0, r = r0; c < M && r >= 0 && r < M; c += s.dc, r += s.dr) {
        t.push_back(c);
        v.push_back(g.at(c, r));
    }
    if (t.size() < 3) return;
    concave_majorant(t, v);
    std::size_t k = 0;
    for (int c = c0, r = r0; c < M && r >= 0 && r < M; c += s.dc, r += s.dr) g.at(c, r) = v[k++];
}

// Envelope of the line through node (i, j) read back at that node. Samples sit
// on every grid column (|eps| <= 1) or row (|eps| > 1) the line crosses.
double generic_node(const BellmanGrid& g, const std::vector<double>& old, double eps, int i, int j,
                    std::vector<double>& t, std::vector<double>& v) {
    const int M = g.size();
    t.clear();
    v.clear();
    const bool by_column = std::abs(eps) <= 1.0;
    std::size_t self = 0;
    for (int k = 0; k < M; ++k) {
        // position along the other axis, in index units
        const double q = by_column ? j + eps * (k - i) : i + (k - j) / eps;
        if (q < -1e-12 || q > M - 1 + 1e-12) continue;
        const double qc = std::clamp(q, 0.0, double(M - 1));
        const int lo = std::min(static_cast<int>(qc), M - 2);
        const double w = qc - lo;
        double val;
        if (by_column)
            val = (1 - w) * old[static_cast<std::size_t>(lo) * M + k] + w * old[static_cast<std::size_t>(lo + 1) * M + k];
        else
            val = (1 - w) * old[static_cast<std::size_t>(k) * M + lo] + w * old[static_cast<std::size_t>(k) * M + lo + 1];
        if (k == (by_column ? i : j)) {
            self = t.size();
            val = old[static_cast<std::size_t>(j) * M + i];
        }
        t.push_back(k);
        v.push_back(val);
    }
    concave_majorant(t, v);
    return v[self];
}

void concavify_impl(BellmanGrid& g, double eps, bool parallel) {
    if (!std::isfinite(eps)) throw std::invalid_argument("slope must be finite");
    const int M = g.size();
    if (auto s = lattice_step(eps)) {
        const auto starts = line_starts(M, *s);
        const long n = static_cast<long>(starts.size());
#pragma omp parallel if (parallel)
        {
            std::vector<double> t, v;
#pragma omp for schedule(dynamic, 16)
            for (long k = 0; k < n; ++k) walk_line(g, *s, starts[k].first, starts[k].second, t, v);
        }
        return;
    }
    const std::vector<double> old = g.values();
#pragma omp parallel if (parallel)
    {
        std::vector<double> t, v;
#pragma omp for schedule(dynamic, 4)
        for (int j = 0; j < M; ++j)
            for (int i = 0; i < M; ++i) g.at(i, j) = generic_node(g, old, eps, i, j, t, v);
    }
}

}  // namespace

void directional_concavify(BellmanGrid& grid, double eps) { concavify_impl(grid, eps, true); }
void directional_concavify_serial(BellmanGrid& grid, double eps) { concavify_impl(grid, eps, false); }

void bellman_step(BellmanGrid& grid) {
    directional_concavify(grid, grid.params().b);
    directional_concavify(grid, grid.params().B);
}

namespace {

void homogeneity_impl(BellmanGrid& g, bool parallel) {
    const int M = g.size(), c = g.center();
    const int R = M / 2;
    const double scale = std::pow(2.0, g.params().p);
    // chain roots: offsets with at least one odd component
#pragma omp parallel if (parallel)
    {
        std::vector<double*> chain;
#pragma omp for schedule(dynamic, 8)
        for (int dj = -R; dj <= R; ++dj)
            for (int di = -R; di <= R; ++di) {
                if ((di % 2 == 0) && (dj % 2 == 0)) continue;
                chain.clear();
                for (int a = di, b = dj; std::abs(a) <= R && std::abs(b) <= R; a *= 2, b *= 2)
                    chain.push_back(&g.at(c + a, c + b));
                if (chain.size() < 2) continue;
                // best value at the root scale
                double best = -std::numeric_limits<double>::infinity(), f = 1.0;
                for (double* v : chain) {
                    best = std::max(best, *v / f);
                    f *= scale;
                }
                f = 1.0;
                for (double* v : chain) {
                    *v = std::max(*v, best * f);
                    f *= scale;
                }
            }
    }
}

}  // namespace

void homogeneity_pass(BellmanGrid& grid) { homogeneity_impl(grid, true); }
void homogeneity_pass_serial(BellmanGrid& grid) { homogeneity_impl(grid, false); }

const char* to_string(BellmanStatus s) {
    switch (s) {
        case BellmanStatus::Converged: return "Converged";
        case BellmanStatus::Diverged: return "Diverged";
        case BellmanStatus::MaxIter: return "MaxIter";
    }
    return "?";
}

IterateResult iterate(BellmanGrid& grid, const IterateOptions& options) {
    if (options.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    const double L = grid.params().half_width;
    const double cap = options.cap.value_or(grid.cap());
    const double zero_tol = options.zero_tol.value_or(1e-9 * (1.0 + std::pow(L, grid.params().p)));
    const int c = grid.center();
    IterateResult r;
    std::vector<double> prev;
    for (int it = 1; it <= options.max_iter; ++it) {
        prev = grid.values();
        if (options.serial) {
            directional_concavify_serial(grid, grid.params().b);
            directional_concavify_serial(grid, grid.params().B);
            if (options.rescale) homogeneity_pass_serial(grid);
        } else {
            bellman_step(grid);
            if (options.rescale) homogeneity_pass(grid);
        }
        double change = 0.0, top = -std::numeric_limits<double>::infinity();
        const auto& cur = grid.values();
        for (std::size_t k = 0; k < cur.size(); ++k) {
            change = std::max(change, std::abs(cur[k] - prev[k]));
            top = std::max(top, cur[k]);
        }
        r.iterations = it;
        r.last_change = change;
        r.origin_value = grid.at(c, c);
        if (r.origin_value > zero_tol || top > cap || !std::isfinite(top)) {
            r.status = BellmanStatus::Diverged;
            return r;
        }
        if (change < options.tol) {
            r.status = BellmanStatus::Converged;
            return r;
        }
    }
    r.status = BellmanStatus::MaxIter;
    return r;
}

double diagonal_max(const BellmanGrid& grid) {
    const int M = grid.size(), c = grid.center();
    double mx = -std::numeric_limits<double>::infinity();
    for (double a : {grid.params().b, grid.params().B}) {
        for (int i = 0; i < M; ++i) {
            // y index of a * x_i when it is a node
            const double q = c + a * (i - c);
            const double r = std::round(q);
            if (std::abs(q - r) > 1e-9 || r < 0 || r > M - 1) continue;
            mx = std::max(mx, grid.at(i, static_cast<int>(r)));
        }
    }
    return mx;
}

bool admissible(const IterateResult& r) { return r.status != BellmanStatus::Diverged; }

namespace {

ThresholdProbe probe(double b, double B, double p, double beta, const ThresholdOptions& o) {
    BellmanGrid g({p, b, B, beta, o.half_width, o.resolution});
    initial_surface(g);
    return {beta, iterate(g, o.iterate)};
}

}  // namespace

ThresholdResult beta_threshold(double b, double B, double p, const ThresholdOptions& options,
                               std::optional<std::pair<double, double>> bracket) {
    if (!(b < B)) throw std::invalid_argument("need b < B");
    if (!(options.width > 0.0)) throw std::invalid_argument("bisection width must be positive");
    const double pstar = std::max(p, p / (p - 1.0));
    const double lo0 = bracket ? bracket->first : 0.5 * std::max(std::abs(b), std::abs(B));
    const double hi0 = bracket ? bracket->second
                               : 0.5 * (B - b) * (pstar - 1.0) + 0.5 * std::abs(B + b) + 0.05;
    if (!(lo0 < hi0)) throw std::invalid_argument("bracket must satisfy lo < hi");

    ThresholdProbe lo, hi;
    // the two ends are independent runs
#pragma omp parallel sections
    {
#pragma omp section
        lo = probe(b, B, p, lo0, options);
#pragma omp section
        hi = probe(b, B, p, hi0, options);
    }
    if (admissible(lo.result) || !admissible(hi.result)) {
        std::ostringstream msg;
        msg << "invalid bracket: beta=" << lo.beta << " -> " << to_string(lo.result.status) << ", beta=" << hi.beta
            << " -> " << to_string(hi.result.status) << " (need Diverged below, admissible above)";
        throw std::invalid_argument(msg.str());
    }

    ThresholdResult out;
    out.probes = 2;
    while (hi.beta - lo.beta > options.width) {
        auto mid = probe(b, B, p, 0.5 * (lo.beta + hi.beta), options);
        ++out.probes;
        (admissible(mid.result) ? hi : lo) = mid;
    }
    out.lo = lo;
    out.hi = hi;
    out.beta_hat = 0.5 * (lo.beta + hi.beta);
    out.width = hi.beta - lo.beta;
    return out;
}

BellmanGrid v_transform(const BellmanGrid& u, double a1, double a2) {
    if (a1 == a2) throw std::invalid_argument("v_transform needs a1 != a2");
    BellmanGrid v(u.params());
    const int M = u.size();
    for (int j = 0; j < M; ++j)
        for (int i = 0; i < M; ++i) {
            const double x = u.coord(i), y = u.coord(j);
            v.at(i, j) = u.interpolate(0.5 * (x - y), 0.5 * (a2 * x - a1 * y));
        }
    return v;
}

BellmanGrid back_transform(const BellmanGrid& v, double a1, double a2) {
    if (a1 == a2) throw std::invalid_argument("back_transform needs a1 != a2");
    BellmanGrid u(v.params());
    const int M = v.size();
    const double d = a2 - a1;
    for (int j = 0; j < M; ++j)
        for (int i = 0; i < M; ++i) {
            const double x = v.coord(i), y = v.coord(j);
            u.at(i, j) = v.interpolate((2 * y - 2 * x * a1) / d, (2 * y - 2 * x * a2) / d);
        }
    return u;
}

namespace {

bool in_window(const BellmanGrid& g, int i, int j, double window) {
    const double lim = window * g.params().half_width + 1e-12;
    return std::abs(g.coord(i)) <= lim && std::abs(g.coord(j)) <= lim;
}

}  // namespace

ConcavityReport directional_concavity_report(const BellmanGrid& v, double c1, double c2, double a1, double a2,
                                             double window) {
    if (c1 == c2) throw std::invalid_argument("direction needs c1 != c2");
    ConcavityReport rep;
    const double m = (a2 * c1 - a1 * c2) / (c1 - c2);
    rep.covered = contains(convex_hull(PointSet({a1, a2})), m);
    const double n = std::hypot(c1, c2);
    const double h = v.spacing();
    const double dx = h * c1 / n, dy = h * c2 / n;
    const int M = v.size();
    for (int j = 0; j < M; ++j)
        for (int i = 0; i < M; ++i) {
            if (!in_window(v, i, j, window)) continue;
            const double x = v.coord(i), y = v.coord(j);
            const double f0 = v.at(i, j);
            const double fm = v.interpolate(x - dx, y - dy), fp = v.interpolate(x + dx, y + dy);
            if (!std::isfinite(f0) || !std::isfinite(fm) || !std::isfinite(fp)) continue;
            rep.max_violation = std::max(rep.max_violation, 0.5 * (fm + fp) - f0);
            ++rep.samples;
        }
    return rep;
}

double axis_midpoint_violation(const BellmanGrid& g, int axis, double sign, double window) {
    const int M = g.size();
    double worst = 0.0;
    for (int j = 0; j < M; ++j)
        for (int i = 0; i < M; ++i) {
            const int di = axis == 0 ? 1 : 0, dj = axis == 0 ? 0 : 1;
            if (i - di < 0 || i + di >= M || j - dj < 0 || j + dj >= M) continue;
            if (!in_window(g, i, j, window)) continue;
            const double a = g.at(i - di, j - dj), b = g.at(i, j), c = g.at(i + di, j + dj);
            if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) continue;
            worst = std::max(worst, sign * (0.5 * (a + c) - b));
        }
    return worst;
}

double curvature_tolerance(const BellmanGrid& g, double window) {
    BellmanGrid u0(g.params());
    initial_surface(u0);
    return std::max(axis_midpoint_violation(u0, 0, 1.0, window), axis_midpoint_violation(u0, 0, -1.0, window)) * 2.0 +
           std::max(axis_midpoint_violation(u0, 1, 1.0, window), axis_midpoint_violation(u0, 1, -1.0, window)) * 2.0;
}

void write_surface_csv(const BellmanGrid& g, std::ostream& os) {
    os << "x,y,U\n";
    std::ostringstream line;
    line.precision(17);
    const int M = g.size();
    for (int j = 0; j < M; ++j)
        for (int i = 0; i < M; ++i) {
            line.str("");
            line << g.coord(i) << ',' << g.coord(j) << ',' << g.at(i, j) << '\n';
            os << line.str();
        }
}

std::string surface_metadata_json(const BellmanGrid& g, const IterateResult& r) {
    const auto& pr = g.params();
    nlohmann::json j = {{"p", pr.p},
                        {"b", pr.b},
                        {"B", pr.B},
                        {"beta", pr.beta},
                        {"half_width", pr.half_width},
                        {"resolution", pr.resolution},
                        {"status", to_string(r.status)},
                        {"iterations", r.iterations},
                        {"last_change", r.last_change},
                        {"origin_value", r.origin_value}};
    return j.dump(2);
}

}  // namespace umdlab
