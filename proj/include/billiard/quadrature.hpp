#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "billiard/errors.hpp"

namespace billiard {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;  // sum to 2
};

/// Gauss-Legendre rule with `count` nodes (Newton iteration on P_count).
inline GaussRule gauss_legendre(int count) {
    if (count < 1) throw InputError("gauss_legendre: need at least one node");
    GaussRule rule;
    rule.nodes.resize(static_cast<std::size_t>(count));
    rule.weights.resize(static_cast<std::size_t>(count));
    const int half = (count + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= count; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = count * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // recompute derivative at the converged root
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= count; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = count * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(count - 1 - i);
        rule.nodes[lo] = -x;
        rule.nodes[hi] = x;
        rule.weights[lo] = w;
        rule.weights[hi] = w;
    }
    if (count % 2 == 1) rule.nodes[static_cast<std::size_t>(count / 2)] = 0.0;
    return rule;
}

/// Composite Simpson's rule with `panels` (even) subintervals.
template <class F>
double simpson(F&& f, double a, double b, int panels) {
    if (panels % 2 != 0) ++panels;
    const double h = (b - a) / panels;
    double sum = f(a) + f(b);
    for (int i = 1; i < panels; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * h);
    return sum * h / 3.0;
}

}  // namespace billiard
