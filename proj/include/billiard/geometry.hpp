#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "billiard/errors.hpp"

namespace billiard {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Residual |g(x)| below which a point counts as lying on the boundary.
inline constexpr double kBoundaryTolerance = 1e-9;
/// Largest residual that project_to_boundary accepts.
inline constexpr double kProjectionReach = 1e-6;

namespace shape {

struct Ball {
    Vector center;
    double radius = 1.0;
};

/// Axis-aligned, centered at the origin.
struct Ellipsoid {
    Vector semi_axes;
};

/// Segment [-L, L] x {0}^{n-1} Minkowski-summed with radius * B^n.
struct Capsule {
    int dim = 2;
    double half_length = 0.0;
    double radius = 1.0;
};

/// {x : normal . x <= offset}
struct Halfspace {
    Vector normal;
    double offset = 0.0;
};

/// Bounded polytope (intersection of halfspaces) Minkowski-summed with radius * B^n.
struct RoundedPolytope {
    std::vector<Halfspace> halfspaces;
    double radius = 1.0;
};

}  // namespace shape

using BodySpec = std::variant<shape::Ball, shape::Ellipsoid, shape::Capsule, shape::RoundedPolytope>;

struct BoundaryPoint {
    Vector position;
    Vector normal;  // inward, unit length

    int dim() const { return static_cast<int>(position.size()); }
};

/// Orthonormal frame of the tangent plane at a boundary point, stored implicitly as a
/// Householder reflection H with H e_k = -sign(n_k) n. The tangent vectors are the
/// columns H e_j, j != k, so embedding a tangent coordinate vector costs O(n).
class TangentFrame {
public:
    explicit TangentFrame(const Vector& normal) : reflector_(normal) {
        const Eigen::Index n = normal.size();
        if (n < 2) throw InputError("tangent frame needs dimension >= 2");
        normal.cwiseAbs().maxCoeff(&pivot_);
        const double sign = normal[pivot_] >= 0.0 ? 1.0 : -1.0;
        reflector_[pivot_] += sign;
        scale_ = 2.0 / reflector_.squaredNorm();
    }

    int dim() const { return static_cast<int>(reflector_.size()); }

    /// Maps tangent coordinates u in R^{n-1} to the vector sum_i u_i e_i in R^n.
    Vector embed(const Vector& u) const {
        const Eigen::Index n = reflector_.size();
        if (u.size() != n - 1) throw InputError("tangent coordinates have wrong dimension");
        Vector full(n);
        full.head(pivot_) = u.head(pivot_);
        full[pivot_] = 0.0;
        full.tail(n - pivot_ - 1) = u.tail(n - pivot_ - 1);
        full -= (scale_ * reflector_.dot(full)) * reflector_;
        return full;
    }

    /// Explicit n x (n-1) basis, one tangent vector per column.
    Matrix basis() const {
        const Eigen::Index n = reflector_.size();
        Matrix out(n, n - 1);
        Eigen::Index col = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == pivot_) continue;
            Vector e = Vector::Unit(n, j);
            e -= (scale_ * reflector_[j]) * reflector_;
            out.col(col++) = e;
        }
        return out;
    }

private:
    Vector reflector_;
    Eigen::Index pivot_ = 0;
    double scale_ = 0.0;
};

inline Matrix tangent_basis(const BoundaryPoint& x) { return TangentFrame(x.normal).basis(); }

inline std::string_view kind_name(const BodySpec& spec) {
    return std::visit(
        [](const auto& s) -> std::string_view {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, shape::Ball>) return "ball";
            else if constexpr (std::is_same_v<T, shape::Ellipsoid>) return "ellipsoid";
            else if constexpr (std::is_same_v<T, shape::Capsule>) return "capsule";
            else return "rounded_polytope";
        },
        spec);
}

/// Immutable convex body with a curvature-bounded boundary.
///
/// Every body is described by a level function g that is convex along lines, negative
/// in the interior and zero on the boundary:
///   ball              ||x - c|| - r
///   ellipsoid         sqrt(sum x_i^2 / a_i^2) - 1
///   capsule/polytope  dist(x, core) - r
/// The capsule core is a segment and the rounded-polytope core is a polytope.
class ConvexBody {
public:
    explicit ConvexBody(BodySpec spec) : spec_(std::move(spec)) {
        std::visit([this](auto& s) { init(s); }, spec_);
    }

    const BodySpec& spec() const { return spec_; }
    std::string_view kind() const { return kind_name(spec_); }
    int dim() const { return dim_; }
    /// Upper bound on the curvature of the boundary.
    double curvature_bound() const { return curvature_; }
    /// Diameter (for rounded polytopes an upper bound is acceptable, here exact).
    double diameter() const { return diameter_; }
    /// Vertices of the rounded polytope's core; empty for other bodies.
    const std::vector<Vector>& core_vertices() const { return vertices_; }

    template <class T>
    const T* as() const { return std::get_if<T>(&spec_); }

    double level(const Vector& x) const {
        check_dim(x);
        return std::visit([&](const auto& s) { return level_impl(s, x); }, spec_);
    }

    /// Closed-set membership.
    bool contains(const Vector& x) const {
        check_finite(x);
        return level(x) <= 0.0;
    }

    Vector inward_normal(const Vector& x) const {
        check_dim(x);
        check_finite(x);
        if (std::abs(level(x)) > kBoundaryTolerance)
            throw DomainError("inward_normal: point is not on the boundary");
        return normal_unchecked(x);
    }

    /// Wraps a point already on the boundary (within tolerance) with its normal.
    BoundaryPoint boundary_point(const Vector& x) const { return {x, inward_normal(x)}; }

    /// Second intersection of the line x + t w with the boundary. Requires w . n_x > 0.
    BoundaryPoint ray_exit(const BoundaryPoint& x, const Vector& w) const {
        check_dim(x.position);
        check_dim(w);
        if (std::abs(w.norm() - 1.0) > 1e-9) throw InputError("ray_exit: direction must be a unit vector");
        if (!(w.dot(x.normal) > 0.0)) throw DirectionError("ray_exit: direction does not point inward");

        const double t = std::visit([&](const auto& s) { return exit_parameter(s, x.position, w); }, spec_);
        if (!(t > 0.0) || !std::isfinite(t)) throw GeometryError("ray_exit: no positive exit parameter");
        return project_to_boundary(x.position + t * w);
    }

    /// Snaps a point within kProjectionReach of the boundary onto it.
    BoundaryPoint project_to_boundary(const Vector& x) const {
        check_dim(x);
        check_finite(x);
        if (std::abs(level(x)) > kProjectionReach)
            throw DomainError("project_to_boundary: point too far from the boundary");
        return std::visit([&](const auto& s) { return project_impl(s, x); }, spec_);
    }

    /// A point strictly inside the body.
    Vector interior_point() const { return interior_; }

    /// Boundary point hit by the ray from interior_point() in the given direction.
    BoundaryPoint boundary_toward(const Vector& direction) const {
        check_dim(direction);
        const double len = direction.norm();
        if (!(len > 0.0)) throw InputError("boundary_toward: zero direction");
        const Vector d = direction / len;
        double lo = 0.0;
        double hi = diameter_ + 1.0;
        for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (level(interior_ + mid * d) < 0.0) lo = mid;
            else hi = mid;
        }
        return project_to_boundary(interior_ + hi * d);
    }

    /// Deterministic start state: a maximizer of the first coordinate.
    BoundaryPoint extreme_point() const { return std::visit([&](const auto& s) { return extreme_impl(s); }, spec_); }

private:
    // --- construction ---------------------------------------------------------------

    static void require_positive(double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v)) throw InputError(std::string(what) + " must be positive and finite");
    }

    void init(shape::Ball& s) {
        dim_ = static_cast<int>(s.center.size());
        require_dim();
        require_positive(s.radius, "ball radius");
        check_finite(s.center);
        curvature_ = 1.0 / s.radius;
        diameter_ = 2.0 * s.radius;
        interior_ = s.center;
    }

    void init(shape::Ellipsoid& s) {
        dim_ = static_cast<int>(s.semi_axes.size());
        require_dim();
        for (double a : s.semi_axes) require_positive(a, "ellipsoid semi-axis");
        const double amax = s.semi_axes.maxCoeff();
        const double amin = s.semi_axes.minCoeff();
        curvature_ = amax / (amin * amin);
        diameter_ = 2.0 * amax;
        interior_ = Vector::Zero(dim_);
    }

    void init(shape::Capsule& s) {
        dim_ = s.dim;
        require_dim();
        require_positive(s.radius, "capsule radius");
        if (!(s.half_length >= 0.0) || !std::isfinite(s.half_length))
            throw InputError("capsule half_length must be non-negative and finite");
        curvature_ = 1.0 / s.radius;
        diameter_ = 2.0 * s.half_length + 2.0 * s.radius;
        interior_ = Vector::Zero(dim_);
    }

    void init(shape::RoundedPolytope& s) {
        require_positive(s.radius, "rounding radius");
        if (s.halfspaces.empty()) throw InputError("rounded_polytope needs halfspaces");
        dim_ = static_cast<int>(s.halfspaces.front().normal.size());
        require_dim();
        const auto m = static_cast<Eigen::Index>(s.halfspaces.size());
        if (m < dim_ + 1) throw InputError("rounded_polytope: too few halfspaces for a bounded polytope");
        faces_.resize(m, dim_);
        offsets_.resize(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            auto& h = s.halfspaces[static_cast<std::size_t>(i)];
            if (h.normal.size() != dim_) throw InputError("rounded_polytope: halfspace dimension mismatch");
            const double len = h.normal.norm();
            require_positive(len, "halfspace normal length");
            if (!std::isfinite(h.offset)) throw InputError("halfspace offset must be finite");
            // store unit normals
            h.normal /= len;
            h.offset /= len;
            faces_.row(i) = h.normal.transpose();
            offsets_[i] = h.offset;
        }
        enumerate_vertices();
        require_bounded();

        double core_diam = 0.0;
        for (std::size_t i = 0; i < vertices_.size(); ++i)
            for (std::size_t j = i + 1; j < vertices_.size(); ++j)
                core_diam = std::max(core_diam, (vertices_[i] - vertices_[j]).norm());
        curvature_ = 1.0 / s.radius;
        diameter_ = core_diam + 2.0 * s.radius;
        interior_ = Vector::Zero(dim_);
        for (const auto& v : vertices_) interior_ += v;
        interior_ /= static_cast<double>(vertices_.size());
    }

    void require_dim() const {
        if (dim_ < 2) throw InputError("bodies must have dimension >= 2");
    }

    // Calls fn(indices) for every k-subset of {0..m-1}.
    template <class Fn>
    static void for_each_subset(int m, int k, Fn&& fn) {
        std::vector<int> idx(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
        if (k > m) return;
        while (true) {
            fn(idx);
            int i = k - 1;
            while (i >= 0 && idx[static_cast<std::size_t>(i)] == m - k + i) --i;
            if (i < 0) return;
            ++idx[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
        }
    }

    static double binomial(int m, int k) {
        double c = 1.0;
        for (int i = 1; i <= k; ++i) c = c * (m - k + i) / i;
        return c;
    }

    void enumerate_vertices() {
        const int m = static_cast<int>(faces_.rows());
        if (binomial(m, dim_) > 2e6) throw InputError("rounded_polytope: too many halfspaces for vertex enumeration");
        const double scale = 1.0 + offsets_.cwiseAbs().maxCoeff();
        for_each_subset(m, dim_, [&](const std::vector<int>& idx) {
            Matrix a(dim_, dim_);
            Vector rhs(dim_);
            for (int r = 0; r < dim_; ++r) {
                a.row(r) = faces_.row(idx[static_cast<std::size_t>(r)]);
                rhs[r] = offsets_[idx[static_cast<std::size_t>(r)]];
            }
            Eigen::FullPivLU<Matrix> lu(a);
            if (lu.rank() < dim_) return;
            const Vector v = lu.solve(rhs);
            if (((faces_ * v - offsets_).array() > 1e-9 * scale).any()) return;
            for (const auto& u : vertices_)
                if ((u - v).norm() <= 1e-9 * scale) return;
            vertices_.push_back(v);
        });
        if (vertices_.empty()) throw InputError("rounded_polytope: empty or unbounded polytope (no vertices)");
    }

    // A pointed polyhedron is unbounded iff its recession cone {d : H d <= 0} has an
    // extreme ray, and every extreme ray is cut out by n-1 independent faces.
    void require_bounded() const {
        const int m = static_cast<int>(faces_.rows());
        bool unbounded = false;
        for_each_subset(m, dim_ - 1, [&](const std::vector<int>& idx) {
            if (unbounded) return;
            Matrix a(dim_ - 1, dim_);
            for (int r = 0; r < dim_ - 1; ++r) a.row(r) = faces_.row(idx[static_cast<std::size_t>(r)]);
            Eigen::FullPivLU<Matrix> lu(a);
            if (lu.rank() < dim_ - 1) return;
            const Matrix kernel = lu.kernel();
            if (kernel.cols() != 1) return;
            const Vector d = kernel.col(0).normalized();
            for (double sign : {1.0, -1.0})
                if (((sign * (faces_ * d)).array() <= 1e-12).all()) unbounded = true;
        });
        if (unbounded) throw InputError("rounded_polytope: polytope is unbounded");
    }

    // --- level functions ------------------------------------------------------------

    static double level_impl(const shape::Ball& s, const Vector& x) { return (x - s.center).norm() - s.radius; }

    static double level_impl(const shape::Ellipsoid& s, const Vector& x) {
        return std::sqrt(x.cwiseQuotient(s.semi_axes).squaredNorm()) - 1.0;
    }

    static Vector segment_projection(const shape::Capsule& s, const Vector& x) {
        Vector p = Vector::Zero(x.size());
        p[0] = std::clamp(x[0], -s.half_length, s.half_length);
        return p;
    }

    static double level_impl(const shape::Capsule& s, const Vector& x) {
        return (x - segment_projection(s, x)).norm() - s.radius;
    }

    double level_impl(const shape::RoundedPolytope& s, const Vector& x) const {
        return (x - polytope_projection(x)).norm() - s.radius;
    }

    /// Euclidean projection onto the core polytope: Hildreth's dual coordinate ascent,
    /// then an exact solve on the detected active set.
    Vector polytope_projection(const Vector& x) const {
        const Vector slack0 = faces_ * x - offsets_;
        if ((slack0.array() <= 0.0).all()) return x;

        const Eigen::Index m = faces_.rows();
        Vector lambda = Vector::Zero(m);
        Vector p = x;
        for (int sweep = 0; sweep < 20000; ++sweep) {
            double biggest = 0.0;
            for (Eigen::Index i = 0; i < m; ++i) {
                const double violation = faces_.row(i).dot(p) - offsets_[i];
                const double updated = std::max(0.0, lambda[i] + violation);
                const double delta = updated - lambda[i];
                if (delta != 0.0) {
                    p.noalias() -= delta * faces_.row(i).transpose();
                    lambda[i] = updated;
                    biggest = std::max(biggest, std::abs(delta));
                }
            }
            if (biggest < 1e-15) break;
        }

        std::vector<Eigen::Index> active;
        for (Eigen::Index i = 0; i < m; ++i)
            if (lambda[i] > 0.0) active.push_back(i);
        if (active.empty()) return p;
        const auto k = static_cast<Eigen::Index>(active.size());
        Matrix ha(k, dim_);
        Vector ba(k);
        for (Eigen::Index r = 0; r < k; ++r) {
            ha.row(r) = faces_.row(active[static_cast<std::size_t>(r)]);
            ba[r] = offsets_[active[static_cast<std::size_t>(r)]];
        }
        const Vector mu = (ha * ha.transpose()).completeOrthogonalDecomposition().solve(ha * x - ba);
        const Vector polished = x - ha.transpose() * mu;
        const double scale = 1.0 + offsets_.cwiseAbs().maxCoeff();
        const bool feasible = ((faces_ * polished - offsets_).array() <= 1e-13 * scale).all();
        if (feasible && (mu.array() >= -1e-12).all()) return polished;
        return p;
    }

    // --- normals --------------------------------------------------------------------

    Vector normal_unchecked(const Vector& x) const {
        return std::visit([&](const auto& s) { return normal_impl(s, x); }, spec_);
    }

    static Vector normal_impl(const shape::Ball& s, const Vector& x) { return (s.center - x).normalized(); }

    static Vector normal_impl(const shape::Ellipsoid& s, const Vector& x) {
        return (-x.cwiseQuotient(s.semi_axes.cwiseProduct(s.semi_axes))).normalized();
    }

    static Vector normal_impl(const shape::Capsule& s, const Vector& x) {
        return (segment_projection(s, x) - x).normalized();
    }

    Vector normal_impl(const shape::RoundedPolytope&, const Vector& x) const {
        return (polytope_projection(x) - x).normalized();
    }

    // --- ray exits ------------------------------------------------------------------

    // x is on the boundary, so the quadratic for the line has a root at t = 0 and the
    // other root is -b/a.
    static double exit_parameter(const shape::Ball& s, const Vector& x, const Vector& w) {
        return -2.0 * (x - s.center).dot(w) / w.squaredNorm();
    }

    static double exit_parameter(const shape::Ellipsoid& s, const Vector& x, const Vector& w) {
        const Vector xs = x.cwiseQuotient(s.semi_axes);
        const Vector ws = w.cwiseQuotient(s.semi_axes);
        return -2.0 * xs.dot(ws) / ws.squaredNorm();
    }

    template <class S>
    double exit_parameter(const S&, const Vector& x, const Vector& w) const {
        // g is convex along the line with g(x) = 0 and negative just inside, so the
        // positive root is unique; bracket it in [eps, D + r] and bisect.
        const double radius = std::visit([](const auto& b) {
            if constexpr (requires { b.radius; }) return b.radius;
            else return 0.0;
        }, spec_);
        const auto g = [&](double t) { return level(x + t * w); };
        double lo = 1e-12 * diameter_;
        int shrink = 0;
        while (g(lo) >= 0.0) {
            if (++shrink > 40) throw GeometryError("ray_exit: cannot bracket the exit point (grazing direction)");
            lo *= 0.125;
        }
        double hi = diameter_ + radius;
        if (!(g(hi) > 0.0)) throw GeometryError("ray_exit: exit point not bracketed within the diameter");
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            const double gm = g(mid);
            if (gm < 0.0) lo = mid;
            else hi = mid;
            if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi && std::abs(gm) < 1e-12) break;
        }
        return hi;
    }

    // --- projections ----------------------------------------------------------------

    static BoundaryPoint snap_around_core(const Vector& core, const Vector& x, double radius) {
        const Vector d = x - core;
        const double len = d.norm();
        if (!(len > 0.0)) throw DomainError("project_to_boundary: point coincides with the core");
        const Vector out = d / len;
        return {core + radius * out, -out};
    }

    static BoundaryPoint project_impl(const shape::Ball& s, const Vector& x) {
        return snap_around_core(s.center, x, s.radius);
    }

    BoundaryPoint project_impl(const shape::Ellipsoid& s, const Vector& x) const {
        // Newton steps along the gradient of the level function.
        Vector y = x;
        const Vector inv_sq = s.semi_axes.cwiseProduct(s.semi_axes).cwiseInverse();
        for (int it = 0; it < 50; ++it) {
            const double q = std::sqrt(y.cwiseQuotient(s.semi_axes).squaredNorm());
            const double g = q - 1.0;
            if (std::abs(g) < 1e-15) break;
            const Vector grad = y.cwiseProduct(inv_sq) / q;
            y -= (g / grad.squaredNorm()) * grad;
        }
        return {y, normal_impl(s, y)};
    }

    static BoundaryPoint project_impl(const shape::Capsule& s, const Vector& x) {
        return snap_around_core(segment_projection(s, x), x, s.radius);
    }

    BoundaryPoint project_impl(const shape::RoundedPolytope& s, const Vector& x) const {
        return snap_around_core(polytope_projection(x), x, s.radius);
    }

    // --- extreme points -------------------------------------------------------------

    BoundaryPoint extreme_impl(const shape::Ball& s) const {
        Vector e = Vector::Unit(dim_, 0);
        return {s.center + s.radius * e, -e};
    }

    BoundaryPoint extreme_impl(const shape::Ellipsoid& s) const {
        Vector e = Vector::Unit(dim_, 0);
        return {s.semi_axes[0] * e, -e};
    }

    BoundaryPoint extreme_impl(const shape::Capsule& s) const {
        Vector e = Vector::Unit(dim_, 0);
        return {(s.half_length + s.radius) * e, -e};
    }

    BoundaryPoint extreme_impl(const shape::RoundedPolytope& s) const {
        std::size_t best = 0;
        for (std::size_t i = 1; i < vertices_.size(); ++i)
            if (vertices_[i][0] > vertices_[best][0]) best = i;
        Vector e = Vector::Unit(dim_, 0);
        return {vertices_[best] + s.radius * e, -e};
    }

    // --- checks ---------------------------------------------------------------------

    void check_dim(const Vector& x) const {
        if (x.size() != dim_) throw InputError("dimension mismatch: body is " + std::to_string(dim_) + "-dimensional");
    }

    static void check_finite(const Vector& x) {
        if (!x.allFinite()) throw InputError("point has non-finite coordinates");
    }

    BodySpec spec_;
    int dim_ = 0;
    double curvature_ = 0.0;
    double diameter_ = 0.0;
    Vector interior_;
    Matrix faces_;
    Vector offsets_;
    std::vector<Vector> vertices_;
};

}  // namespace billiard
