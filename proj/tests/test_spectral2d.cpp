#include <gtest/gtest.h>

#include <billiard/chain.hpp>
#include <billiard/spectral2d.hpp>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"

using namespace billiard;

namespace {

const TransitionMatrix& circle512() {
    static const TransitionMatrix t = build_transition_matrix(ConvexBody(shape::Ball{Vector::Zero(2), 1.0}), 512);
    return t;
}

const SpectralSummary& circle512_summary() {
    static const SpectralSummary s = spectral_summary(circle512());
    return s;
}

ConvexBody stadium(double L) { return ConvexBody(shape::Capsule{2, L, 1.0}); }

}  // namespace

TEST(TransitionMatrix, CircleIsCirculant) {
    const Matrix& P = circle512().P;
    double worst = 0.0;
    for (int i = 1; i < 512; ++i)
        for (int j = 0; j < 512; ++j) worst = std::max(worst, std::abs(P(i, j) - P(0, (j - i + 512) % 512)));
    EXPECT_LT(worst, 1e-9);
}

TEST(TransitionMatrix, StochasticAndBalancedOnEveryBody) {
    std::vector<ConvexBody> bodies;
    bodies.emplace_back(shape::Ball{Eigen::Vector2d(1.0, 2.0), 0.5});
    bodies.emplace_back(shape::Ellipsoid{Eigen::Vector2d(2.0, 1.0)});
    bodies.emplace_back(shape::Ellipsoid{Eigen::Vector2d(5.0, 1.0)});
    bodies.push_back(stadium(1.0));
    bodies.push_back(stadium(8.0));
    shape::RoundedPolytope square;
    square.radius = 0.25;
    for (int i = 0; i < 2; ++i)
        for (double s : {1.0, -1.0}) square.halfspaces.push_back({s * Vector::Unit(2, i), 1.0});
    bodies.emplace_back(square);
    for (const auto& body : bodies) {
        for (int m : {64, 256}) {
            const MatrixChecks c = check_matrix(build_transition_matrix(body, m));
            EXPECT_LT(c.max_row_sum_error, 1e-9) << body.kind() << " m=" << m;
            EXPECT_LT(c.max_balance_error, 1e-9) << body.kind() << " m=" << m;
            EXPECT_GE(c.min_entry, 0.0);
        }
    }
}

TEST(TransitionMatrix, EntriesMatchPointKernel) {
    // Far from the diagonal a bin pair is nearly a point pair: P_ij ~ p(u_i, v_j) l.
    const ConvexBody body(shape::Ellipsoid{Eigen::Vector2d(2.0, 1.0)});
    const TransitionMatrix t = build_transition_matrix(body, 512);
    const PlanarBoundary boundary(body);
    const double ell = boundary.perimeter() / 512;
    for (auto [i, j] : {std::pair{0, 200}, std::pair{100, 400}, std::pair{37, 300}}) {
        const double point = kernel_density(body, boundary.point_at((i + 0.5) * ell), boundary.point_at((j + 0.5) * ell),
                                            KernelNorm::surface) * ell;
        EXPECT_NEAR(t.P(i, j) / point, 1.0, 1e-3);
    }
}

TEST(TransitionMatrix, RejectsBadInput) {
    EXPECT_THROW(build_transition_matrix(ConvexBody(shape::Ball{Vector::Zero(3), 1.0}), 64), InputError);
    EXPECT_THROW(build_transition_matrix(stadium(1.0), 4), InputError);
    EXPECT_THROW(build_transition_matrix(stadium(1.0), 64, {0, 16, 3, 1}), InputError);
}

TEST(TransitionMatrix, ThreadedAssemblyIsIdentical) {
    const ConvexBody body = stadium(2.0);
    const Matrix serial = build_transition_matrix(body, 128).P;
    const Matrix threaded = build_transition_matrix(body, 128, {4, 16, 3, 3}).P;
    EXPECT_TRUE((serial.array() == threaded.array()).all());
}

TEST(Stationary, CircleIsUniform) {
    const auto pi = stationary_distribution(build_transition_matrix(ConvexBody(shape::Ball{Vector::Zero(2), 1.0}), 64));
    EXPECT_NEAR(pi.sum(), 1.0, 1e-12);
    EXPECT_LT((pi.array() - 1.0 / 64).abs().maxCoeff(), 1e-12);
}

TEST(Stationary, EllipseIsUniform) {
    const auto pi = stationary_distribution(build_transition_matrix(ConvexBody(shape::Ellipsoid{Eigen::Vector2d(2.0, 1.0)}), 256));
    EXPECT_LT((pi.array() - 1.0 / 256).abs().maxCoeff(), 1e-6);
}

TEST(Stationary, StadiumIsUniform) {
    const auto pi = stationary_distribution(build_transition_matrix(stadium(2.0), 256));
    EXPECT_LT((pi.array() - 1.0 / 256).abs().maxCoeff(), 1e-5);
}

TEST(Stationary, NonConvergenceIsReported) {
    TransitionMatrix t = build_transition_matrix(stadium(1.0), 16);
    EXPECT_THROW(stationary_distribution(t, 1e-300, 5), NumericError);
}

TEST(Spectrum, CircleEigenvaluesMatchFourierCoefficients) {
    const auto& ev = circle512_summary().eigenvalues;
    EXPECT_NEAR(ev[0], 1.0, 1e-9);
    // Every non-unit eigenvalue is negative and doubly degenerate (k and -k).
    for (int k = 1; k <= 5; ++k) {
        EXPECT_NEAR(ev[static_cast<std::size_t>(2 * k - 1)], oracle::circle_eigenvalue(k), 1e-3) << k;
        EXPECT_NEAR(ev[static_cast<std::size_t>(2 * k)], oracle::circle_eigenvalue(k), 1e-3) << k;
    }
    for (double v : ev) EXPECT_LE(std::abs(v), 1.0 + 1e-9);
}

TEST(Spectrum, CircleGap) {
    EXPECT_NEAR(circle512_summary().gap, 2.0 / 3.0, 1e-3);
}

TEST(Spectrum, CircleGapStableUnderRefinement) {
    const SpectralSummary fine =
        spectral_summary(build_transition_matrix(ConvexBody(shape::Ball{Vector::Zero(2), 1.0}), 1024));
    EXPECT_NEAR(fine.gap, circle512_summary().gap, 1e-3);
}

TEST(Spectrum, CheegerBracketsSweepConductance) {
    std::vector<ConvexBody> bodies;
    bodies.emplace_back(shape::Ball{Vector::Zero(2), 1.0});
    bodies.emplace_back(shape::Ellipsoid{Eigen::Vector2d(3.0, 1.0)});
    bodies.push_back(stadium(4.0));
    for (const auto& body : bodies) {
        const SpectralSummary s = spectral_summary(build_transition_matrix(body, 256));
        EXPECT_LE(s.gap / 2.0, s.best_cut.conductance) << body.kind();
        EXPECT_LE(s.cheeger_lower, s.best_cut.conductance) << body.kind();
        EXPECT_LE(s.best_cut.conductance, s.cheeger_upper + 1e-6) << body.kind();
        EXPECT_LE(s.best_cut.mass, 0.5 + 1e-12);
        EXPECT_EQ(*std::min_element(s.sweep_profile.begin(), s.sweep_profile.end()), s.best_cut.conductance);
    }
}

TEST(Spectrum, SweepConductanceMatchesDirectCount) {
    const TransitionMatrix t = build_transition_matrix(stadium(2.0), 64);
    const Eigen::VectorXd pi = Eigen::VectorXd::Constant(64, 1.0 / 64);
    const auto [cut, profile] = sweep_conductance(t.P, pi);
    double flow = 0.0;
    double mass = 0.0;
    for (int a = 0; a < cut.length; ++a) {
        const int i = (cut.start + a) % 64;
        mass += pi[i];
        for (int j = 0; j < 64; ++j) {
            const int rel = (j - cut.start + 64) % 64;
            if (rel >= cut.length) flow += pi[i] * t.P(i, j);
        }
    }
    EXPECT_NEAR(cut.conductance, flow / mass, 1e-12);
    EXPECT_NEAR(cut.mass, mass, 1e-12);
}

TEST(Spectrum, StadiumConductanceAndGapDecreaseWithLength) {
    double prev_gap = 1.0;
    double prev_phi = 1.0;
    for (double L : {2.0, 4.0, 8.0}) {
        const SpectralSummary s = spectral_summary(build_transition_matrix(stadium(L), 256));
        EXPECT_LT(s.gap, prev_gap) << L;
        EXPECT_LT(s.best_cut.conductance, prev_phi) << L;
        prev_gap = s.gap;
        prev_phi = s.best_cut.conductance;
    }
}
