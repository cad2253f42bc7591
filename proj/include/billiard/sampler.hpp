#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/math/special_functions/beta.hpp>

#include "billiard/errors.hpp"
#include "billiard/geometry.hpp"
#include "billiard/rng.hpp"

namespace billiard {

enum class DirectionLaw {
    cosine,              // density proportional to n_x . w on the inward hemisphere
    uniform_hemisphere,  // uniform on the inward hemisphere
    cosine_two_sided,    // cosine law with a fair random sign
    uniform_sphere,      // uniform on the whole sphere
};

inline std::string_view to_string(DirectionLaw law) {
    switch (law) {
        case DirectionLaw::cosine: return "cosine";
        case DirectionLaw::uniform_hemisphere: return "uniform_hemisphere";
        case DirectionLaw::cosine_two_sided: return "cosine_two_sided";
        case DirectionLaw::uniform_sphere: return "uniform_sphere";
    }
    return "cosine";
}

inline DirectionLaw parse_direction_law(std::string_view name) {
    if (name == "cosine") return DirectionLaw::cosine;
    if (name == "uniform_hemisphere") return DirectionLaw::uniform_hemisphere;
    if (name == "cosine_two_sided") return DirectionLaw::cosine_two_sided;
    if (name == "uniform_sphere") return DirectionLaw::uniform_sphere;
    throw InputError("unknown direction law '" + std::string(name) + "'");
}

inline bool is_one_sided(DirectionLaw law) {
    return law == DirectionLaw::cosine || law == DirectionLaw::uniform_hemisphere;
}

inline Vector sample_gaussian(int d, RngStream& rng) {
    Vector g(d);
    for (int i = 0; i < d; ++i) g[i] = rng.normal();
    return g;
}

/// Uniform point of the d-dimensional unit ball: Gaussian direction scaled by U^{1/d}.
inline Vector sample_unit_ball(int d, RngStream& rng) {
    if (d < 1) throw InputError("sample_unit_ball: dimension must be >= 1");
    Vector g = sample_gaussian(d, rng);
    double len = g.norm();
    while (!(len > 0.0)) {
        g = sample_gaussian(d, rng);
        len = g.norm();
    }
    const double radius = std::pow(rng.uniform(), 1.0 / d);
    return g * (radius / len);
}

inline Vector sample_unit_sphere(int d, RngStream& rng) {
    Vector g = sample_gaussian(d, rng);
    double len = g.norm();
    while (!(len > 0.0)) {
        g = sample_gaussian(d, rng);
        len = g.norm();
    }
    return g / len;
}

/// A cosine-law direction together with the tangent-plane point it was lifted from.
struct CosineSample {
    Vector tangent;    // uniform in the unit ball of the tangent plane (in R^n)
    Vector direction;  // tangent + sqrt(1 - |tangent|^2) n_x
};

inline CosineSample sample_cosine(const TangentFrame& frame, const Vector& normal, RngStream& rng) {
    const Vector u = sample_unit_ball(frame.dim() - 1, rng);
    CosineSample s;
    s.tangent = frame.embed(u);
    const double lift = std::sqrt(std::max(0.0, 1.0 - u.squaredNorm()));
    s.direction = s.tangent + lift * normal;
    s.direction.normalize();
    return s;
}

inline Vector sample_direction(const BoundaryPoint& x, DirectionLaw law, RngStream& rng) {
    const int n = x.dim();
    switch (law) {
        case DirectionLaw::cosine:
            return sample_cosine(TangentFrame(x.normal), x.normal, rng).direction;
        case DirectionLaw::cosine_two_sided: {
            Vector w = sample_cosine(TangentFrame(x.normal), x.normal, rng).direction;
            if (rng.uniform() < 0.5) w = -w;
            return w;
        }
        case DirectionLaw::uniform_hemisphere: {
            Vector w = sample_unit_sphere(n, rng);
            if (w.dot(x.normal) < 0.0) w = -w;
            return w;
        }
        case DirectionLaw::uniform_sphere:
            return sample_unit_sphere(n, rng);
    }
    throw InputError("sample_direction: unknown law");
}

/// CDF of |w . n_x| for the given direction law in dimension n.
///
/// The slice of the unit sphere at height t carries measure proportional to
/// (1 - t^2)^{(n-3)/2} dt. Weighting by t gives the cosine law with CDF
/// 1 - (1 - t^2)^{(n-1)/2}; the uniform law gives the regularized incomplete beta
/// I_{t^2}(1/2, (n-1)/2). Two-sided laws share the CDF of their one-sided versions.
inline double normal_component_cdf(double t, int n, DirectionLaw law) {
    if (!(t >= 0.0 && t <= 1.0)) throw InputError("normal_component_cdf: t must lie in [0, 1]");
    if (n < 2) throw InputError("normal_component_cdf: dimension must be >= 2");
    if (t == 0.0) return 0.0;
    if (t == 1.0) return 1.0;
    switch (law) {
        case DirectionLaw::cosine:
        case DirectionLaw::cosine_two_sided:
            return -std::expm1(0.5 * (n - 1) * std::log1p(-t * t));
        case DirectionLaw::uniform_hemisphere:
        case DirectionLaw::uniform_sphere:
            return boost::math::ibeta(0.5, 0.5 * (n - 1), t * t);
    }
    throw InputError("normal_component_cdf: unknown law");
}

}  // namespace billiard
