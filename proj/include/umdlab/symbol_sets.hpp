#pragma once

#include <vector>

#include "umdlab/spaces.hpp"

namespace umdlab {

inline constexpr double kDedupTol = 1e-12;
inline constexpr double kContainSlack = 1e-12;

// Finite coefficient set; coincident points (within kDedupTol) are merged.
class PointSet {
public:
    explicit PointSet(std::vector<Scalar> points);

    const std::vector<Scalar>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    bool is_real() const;

private:
    std::vector<Scalar> points_;
};

// Convex polygon given by its extreme points, counterclockwise.
// Degenerate hulls: 2 points = segment, 1 point = singleton.
class ConvexRegion {
public:
    const std::vector<Scalar>& extreme_points() const { return extreme_; }
    std::size_t size() const { return extreme_.size(); }

private:
    friend ConvexRegion convex_hull(const PointSet& a);
    friend ConvexRegion minkowski_sum(const ConvexRegion& a, const ConvexRegion& b);
    std::vector<Scalar> extreme_;
};

ConvexRegion convex_hull(const PointSet& a);
PointSet scale(const PointSet& a, Scalar factor);
PointSet conjugate(const PointSet& a);
PointSet minkowski_sum(const PointSet& a, const PointSet& b);
// Edge-merge Minkowski sum of two convex polygons.
ConvexRegion minkowski_sum(const ConvexRegion& a, const ConvexRegion& b);

double diameter(const PointSet& a);
double max_modulus(const PointSet& a);
bool contains(const ConvexRegion& hull, Scalar z, double slack = kContainSlack);
// Conv(inner) within Conv(outer)
bool hull_within(const ConvexRegion& inner, const ConvexRegion& outer, double slack = kContainSlack);
bool same_vertices(const ConvexRegion& a, const ConvexRegion& b, double tol = 1e-12);

// Regular n-gon inscribed in the unit circle; stands in for the closed disk.
PointSet regular_polygon(int n, Scalar center = 0.0, double radius = 1.0);

}  // namespace umdlab
