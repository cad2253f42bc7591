#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <variant>
#include <vector>

#include "billiard/errors.hpp"
#include "billiard/geometry.hpp"
#include "billiard/quadrature.hpp"

namespace billiard {

/// Counter-clockwise arclength parametrization of a planar convex boundary.
///
/// Circles, stadiums and rounded polygons are exact chains of line segments and
/// circular arcs. Ellipses use the angle parametrization (a cos t, b sin t) with a
/// tabulated composite-Simpson arclength and bisection for the inverse.
class PlanarBoundary {
public:
    explicit PlanarBoundary(const ConvexBody& body) {
        if (body.dim() != 2) throw InputError("planar boundary requires a 2-dimensional body");
        std::visit([&](const auto& s) { build(s, body); }, body.spec());
    }

    double perimeter() const { return perimeter_; }

    /// Arclength positions where the boundary switches between segments and arcs.
    const std::vector<double>& breakpoints() const { return starts_; }

    /// Boundary point at arclength s (taken modulo the perimeter).
    BoundaryPoint point_at(double s) const {
        s = wrap(s);
        if (ellipse_) return ellipse_point(ellipse_->angle_of(s));
        auto it = std::upper_bound(starts_.begin(), starts_.end(), s);
        std::size_t k = it == starts_.begin() ? 0 : static_cast<std::size_t>(it - starts_.begin()) - 1;
        const double local = s - starts_[k];
        return std::visit([&](const auto& piece) { return piece.at(local); }, pieces_[k]);
    }

    /// Arclength coordinate in [0, perimeter) of a point on (or very near) the boundary.
    double arclength_of(const Vector& x) const {
        if (x.size() != 2) throw InputError("arclength_of: expected a planar point");
        const Eigen::Vector2d p(x[0], x[1]);
        if (ellipse_) {
            double t = std::atan2(p.y() / ellipse_->b, p.x() / ellipse_->a);
            if (t < 0.0) t += 2.0 * std::numbers::pi;
            return wrap(ellipse_->arclength(t));
        }
        double best_dist = std::numeric_limits<double>::infinity();
        double best_s = 0.0;
        for (std::size_t k = 0; k < pieces_.size(); ++k) {
            const auto [local, dist] = std::visit([&](const auto& piece) { return piece.locate(p); }, pieces_[k]);
            if (dist < best_dist) {
                best_dist = dist;
                best_s = starts_[k] + local;
            }
        }
        return wrap(best_s);
    }

private:
    struct Line {
        Eigen::Vector2d start;
        Eigen::Vector2d dir;  // unit
        double length = 0.0;

        double size() const { return length; }
        BoundaryPoint at(double s) const {
            const Eigen::Vector2d q = start + s * dir;
            return {Vector(q), Vector(Eigen::Vector2d(-dir.y(), dir.x()))};
        }
        std::pair<double, double> locate(const Eigen::Vector2d& p) const {
            const double s = std::clamp((p - start).dot(dir), 0.0, length);
            return {s, (p - (start + s * dir)).norm()};
        }
    };

    struct Arc {
        Eigen::Vector2d center;
        double radius = 1.0;
        double start_angle = 0.0;
        double sweep = 0.0;  // counter-clockwise, radians

        double size() const { return radius * sweep; }
        BoundaryPoint at(double s) const {
            const double a = start_angle + s / radius;
            const Eigen::Vector2d u(std::cos(a), std::sin(a));
            return {Vector(Eigen::Vector2d(center + radius * u)), Vector(Eigen::Vector2d(-u))};
        }
        std::pair<double, double> locate(const Eigen::Vector2d& p) const {
            const Eigen::Vector2d d = p - center;
            double rel = std::atan2(d.y(), d.x()) - start_angle;
            rel = std::fmod(rel, 2.0 * std::numbers::pi);
            if (rel < 0.0) rel += 2.0 * std::numbers::pi;
            if (rel <= sweep) return {radius * rel, std::abs(d.norm() - radius)};
            // past the end: nearer of the two endpoints
            const double to_end = rel - sweep;
            const double to_start = 2.0 * std::numbers::pi - rel;
            const double s = to_end < to_start ? size() : 0.0;
            const Eigen::Vector2d q(at(s).position[0], at(s).position[1]);
            return {s, (p - q).norm()};
        }
    };

    using Piece = std::variant<Line, Arc>;

    struct EllipseTable {
        double a = 1.0;
        double b = 1.0;
        int panels = 4096;
        std::vector<double> cumulative;  // arclength at panel boundaries

        double speed(double t) const { return std::hypot(a * std::sin(t), b * std::cos(t)); }
        double step() const { return 2.0 * std::numbers::pi / panels; }

        void tabulate() {
            cumulative.assign(static_cast<std::size_t>(panels) + 1, 0.0);
            const double h = step();
            for (int k = 0; k < panels; ++k)
                cumulative[static_cast<std::size_t>(k) + 1] =
                    cumulative[static_cast<std::size_t>(k)] +
                    simpson([&](double t) { return speed(t); }, k * h, (k + 1) * h, 8);
        }

        double arclength(double t) const {
            const double h = step();
            int k = std::clamp(static_cast<int>(t / h), 0, panels - 1);
            const double base = k * h;
            return cumulative[static_cast<std::size_t>(k)] + simpson([&](double u) { return speed(u); }, base, t, 8);
        }

        double angle_of(double s) const {
            auto it = std::upper_bound(cumulative.begin(), cumulative.end(), s);
            int k = std::clamp(static_cast<int>(it - cumulative.begin()) - 1, 0, panels - 1);
            double lo = k * step();
            double hi = (k + 1) * step();
            for (int it2 = 0; it2 < 80 && hi - lo > 1e-16; ++it2) {
                const double mid = 0.5 * (lo + hi);
                if (arclength(mid) < s) lo = mid;
                else hi = mid;
            }
            return 0.5 * (lo + hi);
        }
    };

    double wrap(double s) const {
        s = std::fmod(s, perimeter_);
        if (s < 0.0) s += perimeter_;
        if (s >= perimeter_) s = 0.0;
        return s;
    }

    BoundaryPoint ellipse_point(double t) const {
        const double a = ellipse_->a;
        const double b = ellipse_->b;
        Vector pos(2);
        pos << a * std::cos(t), b * std::sin(t);
        Vector n(2);
        n << -std::cos(t) / a, -std::sin(t) / b;
        return {pos, n.normalized()};
    }

    void push(Piece piece) {
        const double len = std::visit([](const auto& p) { return p.size(); }, piece);
        if (len <= 0.0) return;
        starts_.push_back(perimeter_);
        pieces_.push_back(std::move(piece));
        perimeter_ += len;
    }

    void build(const shape::Ball& s, const ConvexBody&) {
        push(Arc{Eigen::Vector2d(s.center[0], s.center[1]), s.radius, 0.0, 2.0 * std::numbers::pi});
    }

    void build(const shape::Ellipsoid& s, const ConvexBody&) {
        EllipseTable table;
        table.a = s.semi_axes[0];
        table.b = s.semi_axes[1];
        table.tabulate();
        perimeter_ = table.cumulative.back();
        ellipse_ = std::move(table);
    }

    void build(const shape::Capsule& s, const ConvexBody&) {
        const double l = s.half_length;
        const double r = s.radius;
        const double pi = std::numbers::pi;
        push(Arc{Eigen::Vector2d(l, 0.0), r, -0.5 * pi, pi});
        push(Line{Eigen::Vector2d(l, r), Eigen::Vector2d(-1.0, 0.0), 2.0 * l});
        push(Arc{Eigen::Vector2d(-l, 0.0), r, 0.5 * pi, pi});
        push(Line{Eigen::Vector2d(-l, -r), Eigen::Vector2d(1.0, 0.0), 2.0 * l});
    }

    void build(const shape::RoundedPolytope& s, const ConvexBody& body) {
        std::vector<Eigen::Vector2d> v;
        Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
        for (const auto& p : body.core_vertices()) {
            v.emplace_back(p[0], p[1]);
            centroid += v.back();
        }
        centroid /= static_cast<double>(v.size());
        std::sort(v.begin(), v.end(), [&](const auto& p, const auto& q) {
            return std::atan2(p.y() - centroid.y(), p.x() - centroid.x()) <
                   std::atan2(q.y() - centroid.y(), q.x() - centroid.x());
        });
        const std::size_t m = v.size();
        const double r = s.radius;
        if (m < 2) {
            push(Arc{v.front(), r, 0.0, 2.0 * std::numbers::pi});
            return;
        }
        std::vector<Eigen::Vector2d> dirs(m);
        std::vector<Eigen::Vector2d> outward(m);
        for (std::size_t i = 0; i < m; ++i) {
            dirs[i] = (v[(i + 1) % m] - v[i]).normalized();
            outward[i] = Eigen::Vector2d(dirs[i].y(), -dirs[i].x());
        }
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t j = (i + 1) % m;
            push(Line{v[i] + r * outward[i], dirs[i], (v[j] - v[i]).norm()});
            const double a0 = std::atan2(outward[i].y(), outward[i].x());
            double sweep = std::atan2(outward[j].y(), outward[j].x()) - a0;
            while (sweep < 0.0) sweep += 2.0 * std::numbers::pi;
            push(Arc{v[j], r, a0, sweep});
        }
    }

    double perimeter_ = 0.0;
    std::vector<Piece> pieces_;
    std::vector<double> starts_;
    std::optional<EllipseTable> ellipse_;
};

/// Surface measure vol(boundary K) where a closed form (or planar arclength) exists.
inline double surface_volume(const ConvexBody& body) {
    const int n = body.dim();
    const auto sphere_area = [](int d) {  // area of the unit sphere in R^d
        return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
    };
    if (const auto* b = body.as<shape::Ball>()) return sphere_area(n) * std::pow(b->radius, n - 1);
    if (const auto* c = body.as<shape::Capsule>())
        return 2.0 * c->half_length * sphere_area(n - 1) * std::pow(c->radius, n - 2) +
               sphere_area(n) * std::pow(c->radius, n - 1);
    if (n == 2) return PlanarBoundary(body).perimeter();
    throw InputError("surface volume is only available for balls, capsules and planar bodies");
}

}  // namespace billiard
