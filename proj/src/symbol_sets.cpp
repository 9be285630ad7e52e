#include "umdlab/symbol_sets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace umdlab {

namespace {

double cross(Scalar o, Scalar a, Scalar b) {
    return (a.real() - o.real()) * (b.imag() - o.imag()) - (a.imag() - o.imag()) * (b.real() - o.real());
}

bool lex_less(Scalar a, Scalar b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
}

// cross normalized by the edge length, so the slack is a distance
bool left_of_or_on(Scalar a, Scalar b, Scalar z, double slack) {
    const double len = std::abs(b - a);
    if (len == 0.0) return std::abs(z - a) <= slack;
    return cross(a, b, z) / len >= -slack;
}

double dist_to_segment(Scalar a, Scalar b, Scalar z) {
    const Scalar ab = b - a;
    const double len2 = std::norm(ab);
    if (len2 == 0.0) return std::abs(z - a);
    double t = ((z - a).real() * ab.real() + (z - a).imag() * ab.imag()) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(z - (a + t * ab));
}

}  // namespace

PointSet::PointSet(std::vector<Scalar> points) {
    if (points.empty()) throw std::invalid_argument("coefficient set must be nonempty");
    for (const auto& z : points) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw std::invalid_argument("coefficient set entries must be finite");
        const bool dup = std::any_of(points_.begin(), points_.end(),
                                     [&](const Scalar& w) { return std::abs(w - z) <= kDedupTol; });
        if (!dup) points_.push_back(z);
    }
}

bool PointSet::is_real() const {
    return std::all_of(points_.begin(), points_.end(), [](const Scalar& z) { return z.imag() == 0.0; });
}

ConvexRegion convex_hull(const PointSet& a) {
    std::vector<Scalar> pts = a.points();
    std::sort(pts.begin(), pts.end(), lex_less);
    ConvexRegion out;
    if (pts.size() == 1) {
        out.extreme_ = pts;
        return out;
    }
    // monotone chain; collinear points are dropped (cross <= 0 pops)
    const double scale = std::max(1.0, std::abs(pts.back() - pts.front()));
    const double eps = 1e-14 * scale * scale;
    std::vector<Scalar> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& z : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], z) <= eps) --k;
        hull[k++] = z;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= eps) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    if (hull.size() == 2 && std::abs(hull[0] - hull[1]) <= kDedupTol) hull.resize(1);
    out.extreme_ = std::move(hull);
    return out;
}

PointSet scale(const PointSet& a, Scalar factor) {
    std::vector<Scalar> r;
    r.reserve(a.size());
    for (const auto& z : a.points()) r.push_back(factor * z);
    return PointSet(std::move(r));
}

PointSet conjugate(const PointSet& a) {
    std::vector<Scalar> r;
    r.reserve(a.size());
    for (const auto& z : a.points()) r.push_back(std::conj(z));
    return PointSet(std::move(r));
}

PointSet minkowski_sum(const PointSet& a, const PointSet& b) {
    std::vector<Scalar> r;
    r.reserve(a.size() * b.size());
    for (const auto& x : a.points())
        for (const auto& y : b.points()) r.push_back(x + y);
    return PointSet(std::move(r));
}

ConvexRegion minkowski_sum(const ConvexRegion& a, const ConvexRegion& b) {
    // Start both polygons at their lowest (then leftmost) vertex and merge edges by angle.
    auto rotate_to_bottom = [](std::vector<Scalar> v) {
        auto it = std::min_element(v.begin(), v.end(), [](Scalar x, Scalar y) {
            return x.imag() < y.imag() || (x.imag() == y.imag() && x.real() < y.real());
        });
        std::rotate(v.begin(), it, v.end());
        return v;
    };
    const auto p = rotate_to_bottom(a.extreme_points());
    const auto q = rotate_to_bottom(b.extreme_points());
    std::vector<Scalar> sum;
    const std::size_t n = p.size(), m = q.size();
    std::size_t i = 0, j = 0;
    while (i < n || j < m) {
        sum.push_back(p[i % n] + q[j % m]);
        if (i == n) {
            ++j;
            continue;
        }
        if (j == m) {
            ++i;
            continue;
        }
        const Scalar ep = p[(i + 1) % n] - p[i % n];
        const Scalar eq = q[(j + 1) % m] - q[j % m];
        const double c = ep.real() * eq.imag() - ep.imag() * eq.real();
        if (n == 1) ++j;
        else if (m == 1) ++i;
        else if (c > 0) ++i;
        else if (c < 0) ++j;
        else {
            ++i;
            ++j;
        }
    }
    // collinear vertices from parallel edges are cleaned by a final hull pass
    return convex_hull(PointSet(sum));
}

double diameter(const PointSet& a) {
    double d = 0.0;
    const auto& pts = a.points();
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, std::abs(pts[i] - pts[j]));
    return d;
}

double max_modulus(const PointSet& a) {
    double m = 0.0;
    for (const auto& z : a.points()) m = std::max(m, std::abs(z));
    return m;
}

bool contains(const ConvexRegion& hull, Scalar z, double slack) {
    const auto& v = hull.extreme_points();
    if (v.size() == 1) return std::abs(z - v[0]) <= slack;
    if (v.size() == 2) return dist_to_segment(v[0], v[1], z) <= slack;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!left_of_or_on(v[i], v[(i + 1) % v.size()], z, slack)) return false;
    return true;
}

bool hull_within(const ConvexRegion& inner, const ConvexRegion& outer, double slack) {
    return std::all_of(inner.extreme_points().begin(), inner.extreme_points().end(),
                       [&](const Scalar& z) { return contains(outer, z, slack); });
}

bool same_vertices(const ConvexRegion& a, const ConvexRegion& b, double tol) {
    if (a.size() != b.size()) return false;
    auto covered = [tol](const ConvexRegion& x, const ConvexRegion& y) {
        for (const auto& z : x.extreme_points()) {
            const bool hit = std::any_of(y.extreme_points().begin(), y.extreme_points().end(),
                                         [&](const Scalar& w) { return std::abs(w - z) <= tol; });
            if (!hit) return false;
        }
        return true;
    };
    return covered(a, b) && covered(b, a);
}

PointSet regular_polygon(int n, Scalar center, double radius) {
    if (n < 1) throw std::invalid_argument("polygon needs at least one vertex");
    std::vector<Scalar> v;
    v.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        v.push_back(center + std::polar(radius, 2.0 * std::numbers::pi * k / n));
    return PointSet(std::move(v));
}

}  // namespace umdlab
