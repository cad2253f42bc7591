#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "billiard/errors.hpp"
#include "billiard/geometry.hpp"
#include "billiard/planar.hpp"
#include "billiard/quadrature.hpp"

namespace billiard {

/// Bin-to-bin discretization of the one-step kernel on a planar boundary.
struct TransitionMatrix {
    ConvexBody body;
    int bins = 0;
    std::vector<double> bin_lengths;
    Matrix P;
};

struct TransitionOptions {
    int quad_points = 4;
    /// Gauss nodes for pairs of bins within near_band of each other (cyclic index distance).
    int near_quad_points = 16;
    int near_band = 3;
    int threads = 1;
};

namespace detail {

struct BinNodes {
    std::vector<Eigen::Vector2d> position;
    std::vector<Eigen::Vector2d> normal;
    std::vector<double> weight;  // arclength weights, summing to the bin length
};

/// Gauss nodes over one bin, with the rule repeated on each smooth piece the bin overlaps.
inline BinNodes bin_nodes(const PlanarBoundary& boundary, double start, double length, const GaussRule& rule) {
    std::vector<double> cuts{start};
    for (double b : boundary.breakpoints())
        if (b > start + 1e-12 * length && b < start + length * (1.0 - 1e-12)) cuts.push_back(b);
    cuts.push_back(start + length);
    BinNodes out;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double a = cuts[c];
        const double h = cuts[c + 1] - a;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const BoundaryPoint p = boundary.point_at(a + 0.5 * h * (rule.nodes[q] + 1.0));
            out.position.emplace_back(p.position[0], p.position[1]);
            out.normal.emplace_back(p.normal[0], p.normal[1]);
            out.weight.push_back(0.5 * h * rule.weights[q]);
        }
    }
    return out;
}

/// Double integral of the planar surface-normalized kernel cos cos / (2 |u - v|) over two bins.
inline double bin_pair_mass(const BinNodes& a, const BinNodes& b) {
    double total = 0.0;
    for (std::size_t p = 0; p < a.weight.size(); ++p) {
        for (std::size_t q = 0; q < b.weight.size(); ++q) {
            const Eigen::Vector2d d = b.position[q] - a.position[p];
            const double len = d.norm();
            if (!(len > 0.0)) continue;
            const double cu = std::max(0.0, a.normal[p].dot(d) / len);
            const double cv = std::max(0.0, -b.normal[q].dot(d) / len);
            total += a.weight[p] * b.weight[q] * cu * cv / (2.0 * len);
        }
    }
    return total;
}

}  // namespace detail

inline TransitionMatrix build_transition_matrix(const ConvexBody& body, int m, const TransitionOptions& opt = {}) {
    if (body.dim() != 2) throw InputError("build_transition_matrix: body must be 2-dimensional");
    if (m < 8) throw InputError("build_transition_matrix: need at least 8 bins");
    if (opt.quad_points < 1 || opt.near_quad_points < 1 || opt.near_band < 0) throw InputError("build_transition_matrix: quad_points >= 1");

    const PlanarBoundary boundary(body);
    const double ell = boundary.perimeter() / m;
    const GaussRule far_rule = gauss_legendre(opt.quad_points);
    const GaussRule near_rule = gauss_legendre(opt.near_quad_points);
    std::vector<detail::BinNodes> far_nodes;
    std::vector<detail::BinNodes> near_nodes;
    for (int i = 0; i < m; ++i) {
        far_nodes.push_back(detail::bin_nodes(boundary, i * ell, ell, far_rule));
        near_nodes.push_back(detail::bin_nodes(boundary, i * ell, ell, near_rule));
    }

    TransitionMatrix out{body, m, std::vector<double>(static_cast<std::size_t>(m), ell), Matrix::Zero(m, m)};
    Matrix& P = out.P;
    // Upper triangle only; the mirror keeps P exactly symmetric (equal bin lengths).
    const auto fill_rows = [&](int row_begin, int row_end) {
        for (int i = row_begin; i < row_end; ++i) {
            for (int j = i + 1; j < m; ++j) {
                const int gap = std::min(j - i, m - (j - i));
                const auto& nodes = gap <= opt.near_band ? near_nodes : far_nodes;
                P(i, j) = detail::bin_pair_mass(nodes[static_cast<std::size_t>(i)], nodes[static_cast<std::size_t>(j)]) / ell;
            }
        }
    };
    const int threads = std::clamp(opt.threads, 1, m);
    if (threads == 1) {
        fill_rows(0, m);
    } else {
        // Row i costs ~(m - i); split the triangle into blocks of equal area.
        std::vector<std::jthread> pool;
        int begin = 0;
        for (int t = 1; t <= threads; ++t) {
            const double frac = 1.0 - std::sqrt(1.0 - static_cast<double>(t) / threads);
            const int end = t == threads ? m : static_cast<int>(std::lround(frac * m));
            pool.emplace_back(fill_rows, begin, end);
            begin = end;
        }
    }
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < i; ++j) P(i, j) = P(j, i);
    for (int i = 0; i < m; ++i) P(i, i) = std::max(0.0, 1.0 - (P.row(i).sum() - P(i, i)));
    return out;
}

struct MatrixChecks {
    double max_row_sum_error = 0.0;
    double max_balance_error = 0.0;
    double min_entry = 0.0;
};

/// Row-stochasticity and detailed balance with respect to bin measure.
inline MatrixChecks check_matrix(const TransitionMatrix& t) {
    MatrixChecks c;
    c.min_entry = t.P.minCoeff();
    for (int i = 0; i < t.bins; ++i) {
        c.max_row_sum_error = std::max(c.max_row_sum_error, std::abs(t.P.row(i).sum() - 1.0));
        for (int j = i + 1; j < t.bins; ++j) {
            const auto ui = static_cast<std::size_t>(i);
            const auto uj = static_cast<std::size_t>(j);
            c.max_balance_error =
                std::max(c.max_balance_error, std::abs(t.bin_lengths[ui] * t.P(i, j) - t.bin_lengths[uj] * t.P(j, i)));
        }
    }
    return c;
}

/// Left fixed point of P by power iteration from the first bin.
inline Eigen::VectorXd stationary_distribution(const TransitionMatrix& t, double tolerance = 1e-12,
                                               long max_iterations = 1000000) {
    Eigen::RowVectorXd pi = Eigen::RowVectorXd::Zero(t.bins);
    pi[0] = 1.0;
    for (long it = 0; it < max_iterations; ++it) {
        Eigen::RowVectorXd next = pi * t.P;
        next /= next.sum();
        const double residual = (next - pi).lpNorm<1>();
        pi = std::move(next);
        if (residual < tolerance) return pi.transpose();
    }
    throw NumericError("stationary_distribution: power iteration did not converge");
}

struct SweepCut {
    int start = 0;
    int length = 0;
    double mass = 0.0;
    double conductance = 0.0;
};

struct SpectralSummary {
    /// lambda_1 first, then by decreasing absolute value.
    std::vector<double> eigenvalues;
    /// 1 - |lambda_2|.
    double gap = 0.0;
    /// 1 - (largest eigenvalue below lambda_1); the quantity the Cheeger bounds use.
    double signed_gap = 0.0;
    double cheeger_lower = 0.0;
    double cheeger_upper = 0.0;
    SweepCut best_cut;
    /// Smallest conductance among arcs of each length 1, 2, ... (index = length - 1).
    std::vector<double> sweep_profile;
};

/// Conductance of contiguous arcs A with 0 < pi(A) <= 1/2, Q(A, A^c) / pi(A).
inline std::pair<SweepCut, std::vector<double>> sweep_conductance(const Matrix& P, const Eigen::VectorXd& pi) {
    const auto m = static_cast<int>(P.rows());
    const int w = 2 * m;
    // Prefix sums of the flow matrix pi_i P_ij on the doubled (cyclic) index range.
    Matrix S = Matrix::Zero(w + 1, w + 1);
    for (int i = 0; i < w; ++i)
        for (int j = 0; j < w; ++j)
            S(i + 1, j + 1) = pi[i % m] * P(i % m, j % m) + S(i, j + 1) + S(i + 1, j) - S(i, j);
    std::vector<double> prefix(static_cast<std::size_t>(w) + 1, 0.0);
    for (int i = 0; i < w; ++i) prefix[static_cast<std::size_t>(i) + 1] = prefix[static_cast<std::size_t>(i)] + pi[i % m];

    SweepCut best;
    best.conductance = std::numeric_limits<double>::infinity();
    std::vector<double> profile;
    for (int len = 1; len < m; ++len) {
        double row_best = std::numeric_limits<double>::infinity();
        for (int s = 0; s < m; ++s) {
            const int e = s + len;
            const double mass = prefix[static_cast<std::size_t>(e)] - prefix[static_cast<std::size_t>(s)];
            if (!(mass > 0.0) || mass > 0.5 + 1e-12) continue;
            const double inside = S(e, e) - S(s, e) - S(e, s) + S(s, s);
            const double phi = std::max(0.0, mass - inside) / mass;
            row_best = std::min(row_best, phi);
            if (phi < best.conductance) best = {s, len, mass, phi};
        }
        if (!std::isfinite(row_best)) break;
        profile.push_back(row_best);
    }
    // The prefix sums lose ~1e-11 to cancellation; redo the winning arc directly.
    if (best.length > 0) {
        double flow = 0.0;
        for (int a = 0; a < best.length; ++a) {
            const int i = (best.start + a) % m;
            for (int b = best.length; b < m; ++b) flow += pi[i] * P(i, (best.start + b) % m);
        }
        best.conductance = flow / best.mass;
        profile[static_cast<std::size_t>(best.length) - 1] = best.conductance;
    }
    return {best, profile};
}

inline SpectralSummary spectral_summary(const TransitionMatrix& t) {
    const int m = t.bins;
    Eigen::VectorXd measure(m);
    for (int i = 0; i < m; ++i) measure[i] = t.bin_lengths[static_cast<std::size_t>(i)];
    measure /= measure.sum();
    const Eigen::VectorXd root = measure.cwiseSqrt();
    Matrix S = root.asDiagonal() * t.P * root.cwiseInverse().asDiagonal();
    S = (0.5 * (S + S.transpose())).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(S, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericError("spectral_summary: eigen solver failed");

    std::vector<double> ev(solver.eigenvalues().data(), solver.eigenvalues().data() + m);
    // ascending order from the solver; the top one is lambda_1
    SpectralSummary out;
    const double top = ev.back();
    out.signed_gap = 1.0 - ev[ev.size() - 2];
    ev.pop_back();
    std::stable_sort(ev.begin(), ev.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
    out.eigenvalues.push_back(top);
    out.eigenvalues.insert(out.eigenvalues.end(), ev.begin(), ev.end());
    out.gap = 1.0 - std::abs(out.eigenvalues[1]);
    out.cheeger_lower = out.signed_gap / 2.0;
    out.cheeger_upper = std::sqrt(2.0 * out.signed_gap);
    auto [cut, profile] = sweep_conductance(t.P, measure);
    out.best_cut = cut;
    out.sweep_profile = std::move(profile);
    return out;
}

}  // namespace billiard
