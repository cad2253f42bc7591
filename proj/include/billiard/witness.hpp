#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "billiard/geometry.hpp"
#include "billiard/rng.hpp"

namespace billiard {

/// Boundary points hit by rays from the interior point in Gaussian directions.
inline std::vector<BoundaryPoint> sample_boundary_points(const ConvexBody& body, std::size_t count, RngStream& rng) {
    std::vector<BoundaryPoint> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Vector d(body.dim());
        for (int j = 0; j < body.dim(); ++j) d[j] = rng.normal();
        out.push_back(body.boundary_toward(d));
    }
    return out;
}

struct WitnessReport {
    bool passed = true;
    std::size_t points = 0;
    /// Curvature: largest level value seen on the inscribed spheres (should be <= 0).
    /// Diameter: largest sampled pairwise distance (should be <= D).
    double worst = 0.0;
};

/// Checks that the ball of radius 1/C tangent at each sampled point lies inside K,
/// probing `probes` points on each inscribed sphere.
inline WitnessReport curvature_witness(const ConvexBody& body, const std::vector<BoundaryPoint>& points, RngStream& rng,
                                       int probes = 8) {
    WitnessReport r;
    r.points = points.size();
    r.worst = -std::numeric_limits<double>::infinity();
    const double radius = 1.0 / body.curvature_bound();
    for (const auto& x : points) {
        const Vector center = x.position + radius * x.normal;
        for (int p = 0; p < probes; ++p) {
            Vector d(body.dim());
            for (int j = 0; j < body.dim(); ++j) d[j] = rng.normal();
            r.worst = std::max(r.worst, body.level(center + radius * (1.0 - 1e-6) * d.normalized()));
        }
    }
    r.passed = r.worst <= 0.0;
    return r;
}

inline WitnessReport diameter_witness(const ConvexBody& body, const std::vector<BoundaryPoint>& points) {
    WitnessReport r;
    r.points = points.size();
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            r.worst = std::max(r.worst, (points[i].position - points[j].position).norm());
    r.passed = r.worst <= body.diameter() + kBoundaryTolerance;
    return r;
}

}  // namespace billiard
