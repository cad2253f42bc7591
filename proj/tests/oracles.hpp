#pragma once

// Closed forms and brute-force references used as independent expected values.

#include <cmath>
#include <numbers>
#include <vector>

#include <billiard/geometry.hpp>
#include <billiard/rng.hpp>

namespace oracle {

inline constexpr double kPi = std::numbers::pi;

// Unit circle: density of the angular separation psi in (0, 2 pi) between successive states.
inline double circle_psi_density(double psi) { return std::sin(psi / 2.0) / 4.0; }
inline double circle_psi_cdf(double psi) { return (1.0 - std::cos(psi / 2.0)) / 2.0; }

// Unit circle: chord-length CDF; the chord is 2 cos(phi) with cos(phi) cosine-distributed.
inline double circle_chord_cdf(double len) { return 1.0 - std::sqrt(std::max(0.0, 1.0 - len * len / 4.0)); }

// Unit sphere S^{n-1}: the level-quantile of the chord length 2t where
// P(t <= s) = 1 - (1 - s^2)^{(n-1)/2}.
inline double sphere_chord_quantile(int n, double level) {
    return 2.0 * std::sqrt(1.0 - std::pow(1.0 - level, 2.0 / (n - 1)));
}

// Fourier coefficients of sin(psi/2)/4 on (0, 2 pi).
inline double circle_eigenvalue(int k) { return 1.0 / (1.0 - 4.0 * k * k); }

// Fraction of the disk of radius t centred on the unit circle that lies inside the unit
// disk: lens area of two intersecting circles at centre distance 1, over pi t^2.
inline double disk_lens_fraction(double t) {
    if (t >= 2.0) return 1.0 / (t * t);
    const double d = 1.0;
    const double a = t * t * std::acos((d * d + t * t - 1.0) / (2.0 * d * t)) +
                     std::acos((d * d + 1.0 - t * t) / (2.0 * d)) -
                     0.5 * std::sqrt((-d + t + 1.0) * (d + t - 1.0) * (d - t + 1.0) * (d + t + 1.0));
    return a / (kPi * t * t);
}

// Largest t with disk_lens_fraction(t) >= gamma (the fraction decreases in t).
inline double disk_s_gamma(double gamma) {
    // beyond t = 2 the fraction is 1/t^2, so the crossing lies below max(2, 1/sqrt(gamma))
    double lo = 1e-9;
    double hi = std::max(2.0, 1.0 / std::sqrt(gamma)) + 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (disk_lens_fraction(mid) >= gamma) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Var(Z_1) for the billiard on an infinite cylinder of radius 1 in R^n.
// With the tangent-ball law, E[(1-|X|^2) 4 X_1^2/(1-X_1^2)^2] reduces (inner radial
// integral in closed form, then a Beta integral) to 8 / (n (n - 2)).
inline double cylinder_var_z1(int n) { return 8.0 / (n * (n - 2.0)); }

// Direct Monte Carlo of Z_1 = 2 X_1 sqrt(1 - |X|^2) / (1 - X_1^2), X uniform in B^{n-1}.
inline double cylinder_var_z1_mc(int n, int samples, billiard::RngStream rng) {
    double acc = 0.0;
    for (int s = 0; s < samples; ++s) {
        std::vector<double> g(static_cast<std::size_t>(n - 1));
        double norm2 = 0.0;
        for (auto& v : g) {
            v = rng.normal();
            norm2 += v * v;
        }
        const double radius = std::pow(rng.uniform(), 1.0 / (n - 1));
        const double scale = radius / std::sqrt(norm2);
        const double x1 = g[0] * scale;
        const double z = 2.0 * x1 * std::sqrt(1.0 - radius * radius) / (1.0 - x1 * x1);
        acc += z * z;
    }
    return acc / samples;
}

// Boundary points along random directions from the body's interior point.
inline std::vector<billiard::BoundaryPoint> random_boundary_points(const billiard::ConvexBody& body, int count,
                                                                   billiard::RngStream rng) {
    std::vector<billiard::BoundaryPoint> out;
    for (int i = 0; i < count; ++i) {
        billiard::Vector d(body.dim());
        for (int j = 0; j < body.dim(); ++j) d[j] = rng.normal();
        out.push_back(body.boundary_toward(d));
    }
    return out;
}

}  // namespace oracle
