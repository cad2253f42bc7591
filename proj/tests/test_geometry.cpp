#include <gtest/gtest.h>

#include <billiard/geometry.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "oracles.hpp"

using namespace billiard;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

shape::RoundedPolytope rounded_box(int dim, double half_width, double radius) {
    shape::RoundedPolytope p;
    p.radius = radius;
    for (int i = 0; i < dim; ++i)
        for (double s : {1.0, -1.0}) p.halfspaces.push_back({s * Vector::Unit(dim, i), half_width});
    return p;
}

shape::RoundedPolytope rounded_triangle() {
    shape::RoundedPolytope p;
    p.radius = 0.5;
    for (int k = 0; k < 3; ++k) {
        const double a = 2.0 * oracle::kPi * k / 3.0 + 0.3;
        p.halfspaces.push_back({vec({std::cos(a), std::sin(a)}), 1.0});
    }
    return p;
}

struct NamedBody {
    std::string name;
    ConvexBody body;
};

std::vector<NamedBody> test_bodies() {
    std::vector<NamedBody> out;
    out.push_back({"unit_circle", ConvexBody(shape::Ball{Vector::Zero(2), 1.0})});
    out.push_back({"shifted_ball3", ConvexBody(shape::Ball{vec({0.5, -1.0, 2.0}), 2.0})});
    out.push_back({"ellipse", ConvexBody(shape::Ellipsoid{vec({2.0, 1.0})})});
    out.push_back({"ellipsoid3", ConvexBody(shape::Ellipsoid{vec({3.0, 2.0, 1.5})})});
    out.push_back({"stadium", ConvexBody(shape::Capsule{2, 1.0, 1.0})});
    out.push_back({"capsule5", ConvexBody(shape::Capsule{5, 2.0, 0.5})});
    out.push_back({"rounded_square", ConvexBody(rounded_box(2, 1.0, 0.5))});
    out.push_back({"rounded_cube", ConvexBody(rounded_box(3, 1.0, 0.4))});
    out.push_back({"rounded_triangle", ConvexBody(rounded_triangle())});
    return out;
}

}  // namespace

TEST(Contains, WorkedExamples) {
    const ConvexBody disk(shape::Ball{Vector::Zero(2), 1.0});
    EXPECT_TRUE(disk.contains(vec({0.0, 0.0})));
    EXPECT_FALSE(disk.contains(vec({2.0, 0.0})));
    const ConvexBody stadium(shape::Capsule{2, 1.0, 1.0});
    // distance from (1.5, 0.5) to the segment endpoint (1, 0) is sqrt(0.5) < 1
    EXPECT_TRUE(stadium.contains(vec({1.5, 0.5})));
    EXPECT_FALSE(stadium.contains(vec({1.8, 0.8})));
}

TEST(Contains, DimensionMismatchIsInputError) {
    const ConvexBody disk(shape::Ball{Vector::Zero(2), 1.0});
    EXPECT_THROW(disk.contains(vec({0.0, 0.0, 0.0})), InputError);
}

TEST(InwardNormal, WorkedExamples) {
    const ConvexBody disk(shape::Ball{Vector::Zero(2), 1.0});
    EXPECT_TRUE(disk.inward_normal(vec({0.0, 1.0})).isApprox(vec({0.0, -1.0}), 1e-15));

    const ConvexBody ellipse(shape::Ellipsoid{vec({2.0, 1.0})});
    EXPECT_TRUE(ellipse.inward_normal(vec({2.0, 0.0})).isApprox(vec({-1.0, 0.0}), 1e-15));

    const ConvexBody stadium(shape::Capsule{2, 1.0, 1.0});
    const double h = 1.0 / std::sqrt(2.0);
    const Vector n = stadium.inward_normal(vec({1.0 + h, h}));
    EXPECT_NEAR(n[0], -h, 1e-12);
    EXPECT_NEAR(n[1], -h, 1e-12);
}

TEST(InwardNormal, OffBoundaryIsDomainError) {
    const ConvexBody disk(shape::Ball{Vector::Zero(2), 1.0});
    EXPECT_THROW(disk.inward_normal(vec({0.5, 0.0})), DomainError);
}

TEST(InwardNormal, MatchesFiniteDifferenceGradient) {
    RngStream rng(11, 0);
    for (const auto& [name, body] : test_bodies()) {
        for (const auto& x : oracle::random_boundary_points(body, 1000, rng.substream(name.size()))) {
            const double h = 1e-6;
            Vector grad(body.dim());
            for (int i = 0; i < body.dim(); ++i) {
                Vector e = Vector::Unit(body.dim(), i) * h;
                grad[i] = (body.level(x.position + e) - body.level(x.position - e)) / (2.0 * h);
            }
            const Vector fd = -grad.normalized();
            ASSERT_LT((fd - x.normal).norm(), 1e-6) << name;
            ASSERT_NEAR(x.normal.norm(), 1.0, 1e-12) << name;
            ASSERT_LT(std::abs(body.level(x.position)), 1e-9) << name;
        }
    }
}

TEST(RayExit, WorkedExamples) {
    const ConvexBody disk(shape::Ball{Vector::Zero(2), 1.0});
    const BoundaryPoint x = disk.boundary_point(vec({1.0, 0.0}));

    const BoundaryPoint y1 = disk.ray_exit(x, vec({-1.0, 0.0}));
    EXPECT_TRUE(y1.position.isApprox(vec({-1.0, 0.0}), 1e-15));
    EXPECT_NEAR((y1.position - x.position).norm(), 2.0, 1e-15);

    const double h = std::sqrt(2.0) / 2.0;
    const BoundaryPoint y2 = disk.ray_exit(x, vec({-h, h}));
    EXPECT_NEAR(y2.position[0], 0.0, 1e-15);
    EXPECT_NEAR(y2.position[1], 1.0, 1e-15);
    EXPECT_NEAR((y2.position - x.position).norm(), std::sqrt(2.0), 1e-15);

    // Stadium: the 45-degree ray from the bottom flat side meets the right cap at
    // t = 1 + sqrt(2), y = (1 + 1/sqrt(2), 1/sqrt(2)).
    const ConvexBody stadium(shape::Capsule{2, 1.0, 1.0});
    const BoundaryPoint bottom = stadium.boundary_point(vec({0.0, -1.0}));
    const BoundaryPoint y3 = stadium.ray_exit(bottom, vec({h, h}));
    EXPECT_NEAR(y3.position[0], 1.0 + h, 1e-12);
    EXPECT_NEAR(y3.position[1], h, 1e-12);
    EXPECT_NEAR((y3.position - bottom.position).norm(), 1.0 + std::sqrt(2.0), 1e-12);
}

TEST(RayExit, OutwardDirectionIsDirectionError) {
    const ConvexBody disk(shape::Ball{Vector::Zero(2), 1.0});
    const BoundaryPoint x = disk.boundary_point(vec({1.0, 0.0}));
    EXPECT_THROW(disk.ray_exit(x, vec({1.0, 0.0})), DirectionError);
    EXPECT_THROW(disk.ray_exit(x, vec({0.0, 1.0})), DirectionError);
}

TEST(RayExit, BallMatchesClosedForm) {
    const ConvexBody ball(shape::Ball{vec({0.5, -1.0, 2.0}), 2.0});
    const Vector c = vec({0.5, -1.0, 2.0});
    RngStream rng(3, 0);
    const auto points = oracle::random_boundary_points(ball, 10000, rng);
    for (const auto& x : points) {
        Vector w(3);
        do {
            for (int i = 0; i < 3; ++i) w[i] = rng.normal();
            w.normalize();
        } while (w.dot(x.normal) <= 1e-6);
        const double expected = -2.0 * (x.position - c).dot(w);
        const BoundaryPoint y = ball.ray_exit(x, w);
        ASSERT_NEAR((y.position - x.position).norm(), expected, 1e-12);
    }
}

TEST(RayExit, ChordsAreValidOnEveryBody) {
    RngStream rng(5, 0);
    for (const auto& [name, body] : test_bodies()) {
        for (const auto& x : oracle::random_boundary_points(body, 500, rng.substream(100 + name.size()))) {
            Vector w(body.dim());
            do {
                for (int i = 0; i < body.dim(); ++i) w[i] = rng.normal();
                w.normalize();
            } while (w.dot(x.normal) <= 1e-3);
            const BoundaryPoint y = body.ray_exit(x, w);
            const double chord = (y.position - x.position).norm();
            ASSERT_LT(std::abs(body.level(y.position)), 1e-9) << name;
            ASSERT_LT(body.level(0.5 * (x.position + y.position)), 0.0) << name;
            ASSERT_LE(chord, body.diameter() + 1e-9) << name;
            ASSERT_GT(chord, 0.0) << name;
            // y lies on the line through x with direction w
            ASSERT_LT(((y.position - x.position) - chord * w).norm(), 1e-9 * (1.0 + chord)) << name;
        }
    }
}

TEST(CurvatureWitness, InscribedBallsStayInside) {
    RngStream rng(17, 0);
    for (const auto& [name, body] : test_bodies()) {
        const double inv_c = 1.0 / body.curvature_bound();
        const auto points = oracle::random_boundary_points(body, 1000, rng.substream(200 + name.size()));
        for (const auto& x : points) {
            const Vector center = x.position + inv_c * x.normal;
            const double radius = inv_c - 1e-6;
            for (int s = 0; s < 8; ++s) {
                Vector d(body.dim());
                for (int i = 0; i < body.dim(); ++i) d[i] = rng.normal();
                // mostly probe the sphere surface, where containment is tightest
                const double scale = s < 6 ? 1.0 : std::pow(rng.uniform(), 1.0 / body.dim());
                ASSERT_TRUE(body.contains(center + radius * scale * d.normalized())) << name;
            }
        }
    }
}

TEST(TangentBasis, WorkedExamples) {
    const BoundaryPoint up{vec({0.0, 0.0}), vec({0.0, 1.0})};
    const Matrix b2 = tangent_basis(up);
    ASSERT_EQ(b2.cols(), 1);
    EXPECT_NEAR(std::abs(b2(0, 0)), 1.0, 1e-15);
    EXPECT_NEAR(b2(1, 0), 0.0, 1e-15);

    const BoundaryPoint z{Vector::Zero(3), vec({0.0, 0.0, 1.0})};
    const Matrix b3 = tangent_basis(z);
    ASSERT_EQ(b3.cols(), 2);
    EXPECT_NEAR(b3.row(2).norm(), 0.0, 1e-15);
    EXPECT_TRUE((b3.transpose() * b3).isApprox(Matrix::Identity(2, 2), 1e-15));
}

TEST(TangentBasis, OrthonormalForArbitraryNormals) {
    RngStream rng(23, 0);
    for (int n : {2, 3, 7, 50}) {
        for (int trial = 0; trial < 200; ++trial) {
            Vector nx(n);
            for (int i = 0; i < n; ++i) nx[i] = rng.normal();
            nx.normalize();
            if (n == 3 && trial == 0) nx = Vector::Ones(3) / std::sqrt(3.0);
            const Matrix b = tangent_basis({Vector::Zero(n), nx});
            ASSERT_EQ(b.cols(), n - 1);
            ASSERT_LT((b.transpose() * b - Matrix::Identity(n - 1, n - 1)).cwiseAbs().maxCoeff(), 1e-12);
            ASSERT_LT((b.transpose() * nx).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
}

TEST(ProjectToBoundary, WorkedExamples) {
    const ConvexBody disk(shape::Ball{Vector::Zero(2), 1.0});
    const BoundaryPoint a = disk.project_to_boundary(vec({1.0 + 1e-8, 0.0}));
    EXPECT_NEAR(a.position[0], 1.0, 1e-15);
    EXPECT_NEAR(a.position[1], 0.0, 1e-15);

    const ConvexBody ellipse(shape::Ellipsoid{vec({2.0, 1.0})});
    const BoundaryPoint b = ellipse.project_to_boundary(vec({0.0, 1.0 - 1e-9}));
    EXPECT_NEAR(b.position[0], 0.0, 1e-15);
    EXPECT_NEAR(b.position[1], 1.0, 1e-15);

    const ConvexBody stadium(shape::Capsule{2, 1.0, 1.0});
    const BoundaryPoint c = stadium.project_to_boundary(vec({0.0, 1.0 + 1e-8}));
    EXPECT_NEAR(c.position[0], 0.0, 1e-15);
    EXPECT_NEAR(c.position[1], 1.0, 1e-15);
}

TEST(ProjectToBoundary, FarPointIsDomainError) {
    const ConvexBody disk(shape::Ball{Vector::Zero(2), 1.0});
    EXPECT_THROW(disk.project_to_boundary(vec({0.5, 0.0})), DomainError);
    EXPECT_THROW(disk.project_to_boundary(vec({1.1, 0.0})), DomainError);
}

TEST(ProjectToBoundary, SmallDisplacementAndTightResidual) {
    RngStream rng(29, 0);
    for (const auto& [name, body] : test_bodies()) {
        for (const auto& x : oracle::random_boundary_points(body, 200, rng.substream(300 + name.size()))) {
            Vector noise(body.dim());
            for (int i = 0; i < body.dim(); ++i) noise[i] = rng.normal();
            const Vector perturbed = x.position + 1e-8 * noise.normalized();
            const double residual = std::abs(body.level(perturbed));
            const BoundaryPoint p = body.project_to_boundary(perturbed);
            ASSERT_LT(std::abs(body.level(p.position)), 1e-12) << name;
            ASSERT_LE((p.position - perturbed).norm(), 10.0 * residual + 1e-15) << name;
        }
    }
}

TEST(DerivedConstants, CurvatureAndDiameter) {
    const ConvexBody ball(shape::Ball{Vector::Zero(3), 2.0});
    EXPECT_DOUBLE_EQ(ball.curvature_bound(), 0.5);
    EXPECT_DOUBLE_EQ(ball.diameter(), 4.0);

    const ConvexBody capsule(shape::Capsule{8, 4.0, 1.0});
    EXPECT_DOUBLE_EQ(capsule.curvature_bound(), 1.0);
    EXPECT_DOUBLE_EQ(capsule.diameter(), 10.0);

    const ConvexBody ellipsoid(shape::Ellipsoid{vec({2.0, 1.0, 1.0})});
    EXPECT_DOUBLE_EQ(ellipsoid.curvature_bound(), 2.0);
    EXPECT_DOUBLE_EQ(ellipsoid.diameter(), 4.0);

    // rounded square: core diagonal 2 sqrt(2) plus 2r
    const ConvexBody square(rounded_box(2, 1.0, 0.5));
    EXPECT_DOUBLE_EQ(square.curvature_bound(), 2.0);
    EXPECT_NEAR(square.diameter(), 2.0 * std::sqrt(2.0) + 1.0, 1e-12);
    EXPECT_EQ(square.core_vertices().size(), 4u);

    const ConvexBody cube(rounded_box(3, 1.0, 0.4));
    EXPECT_EQ(cube.core_vertices().size(), 8u);
    EXPECT_NEAR(cube.diameter(), 2.0 * std::sqrt(3.0) + 0.8, 1e-12);
}

TEST(DiameterWitness, SampledChordsNeverExceedDiameter) {
    RngStream rng(31, 0);
    for (const auto& [name, body] : test_bodies()) {
        const auto pts = oracle::random_boundary_points(body, 300, rng.substream(400 + name.size()));
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j)
                ASSERT_LE((pts[i].position - pts[j].position).norm(), body.diameter() + 1e-9) << name;
    }
}

TEST(InvalidBodies, RejectedAtConstruction) {
    EXPECT_THROW(ConvexBody(shape::Ball{Vector::Zero(2), 0.0}), InputError);
    EXPECT_THROW(ConvexBody(shape::Ball{Vector::Zero(2), -1.0}), InputError);
    EXPECT_THROW(ConvexBody(shape::Ellipsoid{vec({1.0, 0.0})}), InputError);
    EXPECT_THROW(ConvexBody(shape::Capsule{3, -1.0, 1.0}), InputError);
    EXPECT_THROW(ConvexBody(shape::Capsule{1, 1.0, 1.0}), InputError);

    // unbounded wedge {y >= 0, y <= x}
    shape::RoundedPolytope wedge;
    wedge.radius = 1.0;
    wedge.halfspaces = {{vec({0.0, -1.0}), 0.0}, {vec({-1.0, 1.0}), 0.0}, {vec({-1.0, -0.5}), 0.0}};
    EXPECT_THROW(ConvexBody{wedge}, InputError);

    // empty: x <= -1 and x >= 1
    shape::RoundedPolytope empty;
    empty.radius = 1.0;
    empty.halfspaces = {{vec({1.0, 0.0}), -1.0}, {vec({-1.0, 0.0}), -1.0}, {vec({0.0, 1.0}), 1.0}, {vec({0.0, -1.0}), 1.0}};
    EXPECT_THROW(ConvexBody{empty}, InputError);
}

TEST(RoundedPolytope, NonUnitNormalsAreNormalized) {
    shape::RoundedPolytope p = rounded_box(2, 1.0, 0.5);
    for (auto& h : p.halfspaces) {
        h.normal *= 3.0;
        h.offset *= 3.0;
    }
    const ConvexBody body(p);
    EXPECT_NEAR(body.diameter(), 2.0 * std::sqrt(2.0) + 1.0, 1e-12);
    EXPECT_TRUE(body.contains(vec({1.4, 0.0})));
    EXPECT_FALSE(body.contains(vec({1.6, 0.0})));
}

TEST(ExtremePoint, MaximizesFirstCoordinate) {
    for (const auto& [name, body] : test_bodies()) {
        const BoundaryPoint e = body.extreme_point();
        ASSERT_LT(std::abs(body.level(e.position)), 1e-12) << name;
        ASSERT_TRUE(e.normal.isApprox(-Vector::Unit(body.dim(), 0), 1e-12)) << name;
    }
}
