#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "billiard/chain.hpp"
#include "billiard/errors.hpp"
#include "billiard/geometry.hpp"
#include "billiard/parallel.hpp"
#include "billiard/planar.hpp"
#include "billiard/quadrature.hpp"
#include "billiard/sampler.hpp"
#include "billiard/stats.hpp"

namespace billiard {

namespace detail {

/// Surface area of the unit sphere S^{k-1} in R^k.
inline double unit_sphere_area(int k) {
    return 2.0 * std::exp(0.5 * k * std::log(std::numbers::pi) - std::lgamma(0.5 * k));
}

/// P(t <= s) for one coordinate t of a uniform point on S^{n-1}.
inline double sphere_coordinate_cdf(double s, int n) {
    s = std::clamp(s, -1.0, 1.0);
    const double half = 0.5 * boost::math::ibeta(0.5, 0.5 * (n - 1), s * s);
    return s >= 0.0 ? 0.5 + half : 0.5 - half;
}

}  // namespace detail

/// Finite partition of the boundary with exact uniform reference masses.
///
/// Planar bodies use equal-arclength arcs. Balls and capsules in n >= 3 use equal-width
/// slabs of the first coordinate, optionally split four ways by the signs of x_2 and x_3.
class Partition {
public:
    static Partition arclength(const ConvexBody& body, int bins) {
        if (body.dim() != 2) throw InputError("arclength partition needs a planar body");
        if (bins < 1) throw InputError("partition needs at least one bin");
        Partition p;
        p.bins_ = bins;
        p.boundary_ = std::make_shared<PlanarBoundary>(body);
        p.reference_.assign(static_cast<std::size_t>(bins), 1.0 / bins);
        p.signature_ = std::string("arclength/") + std::string(body.kind()) + "/" + std::to_string(bins);
        return p;
    }

    static Partition first_coordinate(const ConvexBody& body, int bins, bool orthants = false) {
        const int n = body.dim();
        if (n < 3) throw InputError("first-coordinate partition needs n >= 3");
        if (bins < 1) throw InputError("partition needs at least one bin");
        Partition p;
        p.bins_ = bins;
        p.orthants_ = orthants;
        p.center_ = Vector::Zero(n);
        std::vector<double> slab(static_cast<std::size_t>(bins));
        if (const auto* ball = body.as<shape::Ball>()) {
            p.center_ = ball->center;
            p.lo_ = ball->center[0] - ball->radius;
            p.hi_ = ball->center[0] + ball->radius;
            for (int b = 0; b < bins; ++b)
                slab[static_cast<std::size_t>(b)] = detail::sphere_coordinate_cdf(-1.0 + 2.0 * (b + 1) / bins, n) -
                                                    detail::sphere_coordinate_cdf(-1.0 + 2.0 * b / bins, n);
        } else if (const auto* cap = body.as<shape::Capsule>()) {
            const double L = cap->half_length;
            const double r = cap->radius;
            p.lo_ = -L - r;
            p.hi_ = L + r;
            const double lateral = detail::unit_sphere_area(n - 1) * std::pow(r, n - 2);
            const double sphere = detail::unit_sphere_area(n) * std::pow(r, n - 1);
            const auto area_below = [&](double x) {
                // surface area with first coordinate <= x
                if (x <= -L) return sphere * detail::sphere_coordinate_cdf((x + L) / r, n);
                if (x <= L) return 0.5 * sphere + lateral * (x + L);
                return 0.5 * sphere + lateral * 2.0 * L + sphere * (detail::sphere_coordinate_cdf((x - L) / r, n) - 0.5);
            };
            const double total = area_below(p.hi_);
            for (int b = 0; b < bins; ++b) {
                const double a = p.lo_ + (p.hi_ - p.lo_) * b / bins;
                const double c = p.lo_ + (p.hi_ - p.lo_) * (b + 1) / bins;
                slab[static_cast<std::size_t>(b)] = (area_below(c) - area_below(a)) / total;
            }
        } else {
            throw InputError("first-coordinate partition supports balls and capsules only");
        }
        for (double m : slab)
            for (int o = 0; o < (orthants ? 4 : 1); ++o) p.reference_.push_back(orthants ? m / 4.0 : m);
        p.signature_ = std::string("x1/") + std::string(body.kind()) + "/" + std::to_string(n) + "/" +
                       std::to_string(bins) + (orthants ? "/orthants" : "");
        return p;
    }

    /// Arclength bins in the plane, first-coordinate bins otherwise.
    static Partition for_body(const ConvexBody& body, int bins, bool orthants = false) {
        return body.dim() == 2 ? arclength(body, bins) : first_coordinate(body, bins, orthants);
    }

    int size() const { return static_cast<int>(reference_.size()); }
    const std::vector<double>& reference() const { return reference_; }
    const std::string& signature() const { return signature_; }

    int bin_of(const Vector& x) const {
        if (boundary_) {
            const double s = boundary_->arclength_of(x) / boundary_->perimeter();
            return std::clamp(static_cast<int>(s * bins_), 0, bins_ - 1);
        }
        const double s = (x[0] - lo_) / (hi_ - lo_);
        const int slab = std::clamp(static_cast<int>(s * bins_), 0, bins_ - 1);
        if (!orthants_) return slab;
        const int quadrant = (x[1] >= center_[1] ? 1 : 0) + (x[2] >= center_[2] ? 2 : 0);
        return 4 * slab + quadrant;
    }

private:
    Partition() = default;

    int bins_ = 0;
    bool orthants_ = false;
    double lo_ = 0.0;
    double hi_ = 1.0;
    Vector center_;
    std::shared_ptr<const PlanarBoundary> boundary_;
    std::vector<double> reference_;
    std::string signature_;
};

class Histogram {
public:
    explicit Histogram(const Partition& partition)
        : signature_(partition.signature()), counts_(static_cast<std::size_t>(partition.size()), 0.0) {}

    /// A histogram given directly by (not necessarily normalized) bin masses.
    Histogram(std::string signature, std::vector<double> masses) : signature_(std::move(signature)), counts_(std::move(masses)) {
        for (double c : counts_)
            if (!(c >= 0.0)) throw InputError("histogram masses must be non-negative");
        total_ = std::accumulate(counts_.begin(), counts_.end(), 0.0);
    }

    void add_bin(int bin, double weight = 1.0) {
        counts_.at(static_cast<std::size_t>(bin)) += weight;
        total_ += weight;
    }
    void add(const Partition& partition, const Vector& x) { add_bin(partition.bin_of(x)); }

    void merge(const Histogram& other) {
        if (other.signature_ != signature_ || other.counts_.size() != counts_.size())
            throw InputError("histogram merge: partition mismatch");
        for (std::size_t b = 0; b < counts_.size(); ++b) counts_[b] += other.counts_[b];
        total_ += other.total_;
    }

    const std::string& signature() const { return signature_; }
    double total() const { return total_; }
    const std::vector<double>& counts() const { return counts_; }

    std::vector<double> masses() const {
        if (!(total_ > 0.0)) throw InputError("histogram is empty");
        std::vector<double> out(counts_);
        for (double& v : out) v /= total_;
        return out;
    }

private:
    std::string signature_;
    std::vector<double> counts_;
    double total_ = 0.0;
};

/// Half the L1 distance between two normalized mass vectors.
inline double empirical_tv(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size() || p.empty()) throw InputError("empirical_tv: partition mismatch");
    double acc = 0.0;
    for (std::size_t b = 0; b < p.size(); ++b) acc += std::abs(p[b] - q[b]);
    return std::clamp(0.5 * acc, 0.0, 1.0);
}

inline double empirical_tv(const Histogram& p, const Histogram& q) {
    if (p.signature() != q.signature()) throw InputError("empirical_tv: partition mismatch");
    return empirical_tv(p.masses(), q.masses());
}

/// Reference (uniform surface measure) histogram of a partition.
inline Histogram reference_histogram(const Partition& partition) {
    return Histogram(partition.signature(), partition.reference());
}

// ---------------------------------------------------------------------------
// Step-size quantile F

struct QuantileEstimate {
    double level = 0.0;
    double value = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t samples = 0;
};

/// Sorted chord lengths of `samples` independent single steps from x.
inline std::vector<double> one_step_chords(const ConvexBody& body, const BoundaryPoint& x, std::size_t samples,
                                           RngStream& rng, DirectionLaw law = DirectionLaw::cosine) {
    std::vector<double> chords;
    chords.reserve(samples);
    for (std::size_t s = 0; s < samples; ++s) chords.push_back(step(body, x, rng, law).chord);
    std::sort(chords.begin(), chords.end());
    return chords;
}

inline QuantileEstimate quantile_of_sorted(std::span<const double> sorted, double level) {
    if (!(level > 0.0 && level < 1.0)) throw InputError("quantile level must lie in (0, 1)");
    const auto [lo, hi] = stats::quantile_ci(sorted, level);
    return {level, stats::sorted_quantile(sorted, level), lo, hi, sorted.size()};
}

inline QuantileEstimate estimate_F(const ConvexBody& body, const BoundaryPoint& x, std::size_t samples, RngStream& rng,
                                   double level = 1.0 / 128.0) {
    if (samples < 10000) throw InputError("estimate_F: need at least 1e4 samples");
    const auto chords = one_step_chords(body, x, samples, rng);
    return quantile_of_sorted(chords, level);
}

// ---------------------------------------------------------------------------
// Local fullness radius s_gamma

struct SGammaEstimate {
    double gamma = 0.0;
    double t = 0.0;
    double g_t = 0.0;
    double se = 0.0;
    /// Set when gamma >= 1/2, where the small-radius limit of the fraction is 1/2.
    bool degenerate = false;
};

/// Fraction of fixed offsets u with x + t u inside K. For convex K and x in K each
/// indicator is nonincreasing in t, so with common offsets g(t) is exactly monotone.
class BallFraction {
public:
    BallFraction(const ConvexBody& body, const BoundaryPoint& x, std::size_t points, RngStream& rng)
        : body_(&body), x_(x.position) {
        offsets_.reserve(points);
        for (std::size_t i = 0; i < points; ++i) offsets_.push_back(sample_unit_ball(body.dim(), rng));
    }

    double operator()(double t) const {
        std::size_t hits = 0;
        for (const auto& u : offsets_) hits += body_->level(x_ + t * u) <= 0.0;
        return static_cast<double>(hits) / static_cast<double>(offsets_.size());
    }

    std::size_t points() const { return offsets_.size(); }

private:
    const ConvexBody* body_;
    Vector x_;
    std::vector<Vector> offsets_;
};

inline SGammaEstimate s_gamma(const ConvexBody& body, const BoundaryPoint& x, double gamma, std::size_t mc_points,
                              RngStream& rng) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw InputError("s_gamma: gamma must lie in (0, 1)");
    if (mc_points < 10000) throw InputError("s_gamma: need at least 1e4 Monte Carlo points");
    SGammaEstimate out;
    out.gamma = gamma;
    if (gamma >= 0.5) {
        out.degenerate = true;
        return out;
    }
    const BallFraction g(body, x, mc_points, rng);
    const auto se_of = [&](double p) { return std::sqrt(p * (1.0 - p) / static_cast<double>(mc_points)); };

    // 64 log-spaced radii bracket the crossing; the top is raised until g drops below gamma.
    const double scale = body.diameter();
    double t_min = 1e-6 * scale;
    double t_max = 2.0 * scale;
    while (g(t_max) >= gamma) t_max *= 2.0;
    if (g(t_min) < gamma) {
        out.g_t = g(t_min);
        out.se = se_of(out.g_t);
        return out;
    }
    double lo = t_min;
    double hi = t_max;
    for (int i = 1; i < 64; ++i) {
        const double t = t_min * std::pow(t_max / t_min, i / 63.0);
        if (g(t) >= gamma) lo = t;
        else {
            hi = t;
            break;
        }
    }
    for (int i = 0; i < 60 && hi - lo > 1e-12 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) >= gamma) lo = mid;
        else hi = mid;
    }
    out.t = lo;
    out.g_t = g(lo);
    out.se = se_of(out.g_t);
    return out;
}

// ---------------------------------------------------------------------------
// One-step overlap

inline Histogram one_step_histogram(const ConvexBody& body, const BoundaryPoint& x, std::size_t samples,
                                    const Partition& partition, RngStream rng) {
    Histogram h(partition);
    for (std::size_t s = 0; s < samples; ++s) h.add(partition, step(body, x, rng).position);
    return h;
}

/// Binned TV between the one-step laws from u and from v (independent sample streams).
inline double overlap_tv(const ConvexBody& body, const BoundaryPoint& u, const BoundaryPoint& v, std::size_t samples,
                         const Partition& partition, const RngStream& rng) {
    if (samples == 0) throw InputError("overlap_tv: need samples");
    return empirical_tv(one_step_histogram(body, u, samples, partition, rng.substream(2 * rng.stream())),
                        one_step_histogram(body, v, samples, partition, rng.substream(2 * rng.stream() + 1)));
}

// ---------------------------------------------------------------------------
// Mixing curve

struct MixingCurve {
    std::vector<std::size_t> checkpoints;
    std::vector<double> tv;
    std::vector<double> se;
    /// Warm-start constant max_b Q_0(b) / pi(b).
    double warm_start = 1.0;
    std::size_t replicas = 0;
};

/// Delta-method standard error of the binned TV estimate.
inline double tv_standard_error(std::span<const double> p_hat, std::span<const double> reference, double n) {
    double first = 0.0;
    double second = 0.0;
    for (std::size_t b = 0; b < p_hat.size(); ++b) {
        const double s = p_hat[b] > reference[b] ? 1.0 : (p_hat[b] < reference[b] ? -1.0 : 0.0);
        first += s * p_hat[b];
        second += s * s * p_hat[b];
    }
    return 0.5 * std::sqrt(std::max(0.0, second - first * first) / n);
}

/// Fresh-start ensemble: replica r runs on stream r from the configured start.
inline MixingCurve mixing_curve(const ConvexBody& body, const ChainConfig& config, const Partition& partition,
                                std::size_t replicas, std::vector<std::size_t> checkpoints, int threads = 1) {
    if (replicas < 1000) throw InputError("mixing_curve: need at least 1e3 replicas");
    if (checkpoints.empty()) throw InputError("mixing_curve: need checkpoints");
    std::sort(checkpoints.begin(), checkpoints.end());
    checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
    const BoundaryPoint start = config.start ? *config.start : body.extreme_point();
    const std::size_t horizon = checkpoints.back();
    const auto slots = checkpoints.size();

    // bins[r * slots + c]: bin of replica r at checkpoint c
    std::vector<int> bins(replicas * slots);
    parallel_for(replicas, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            RngStream rng(config.seed, r);
            BoundaryPoint x = start;
            std::size_t c = 0;
            for (std::size_t k = 0; k <= horizon; ++k) {
                if (k > 0) {
                    const StepRecord rec = step(body, x, rng, config.law);
                    x = {rec.position, rec.normal};
                }
                while (c < slots && checkpoints[c] == k) bins[r * slots + c++] = partition.bin_of(x.position);
            }
        }
    });

    MixingCurve out;
    out.checkpoints = checkpoints;
    out.replicas = replicas;
    const auto& ref = partition.reference();
    for (std::size_t c = 0; c < slots; ++c) {
        Histogram h(partition);
        for (std::size_t r = 0; r < replicas; ++r) h.add_bin(bins[r * slots + c]);
        const auto p = h.masses();
        out.tv.push_back(empirical_tv(p, ref));
        out.se.push_back(tv_standard_error(p, ref, static_cast<double>(replicas)));
    }
    out.warm_start = 1.0 / ref[static_cast<std::size_t>(partition.bin_of(start.position))];
    return out;
}

/// First checkpoint whose TV is below the threshold.
inline std::optional<std::size_t> first_below(const MixingCurve& curve, double threshold) {
    for (std::size_t c = 0; c < curve.tv.size(); ++c)
        if (curve.tv[c] < threshold) return curve.checkpoints[c];
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Capsule lower-bound experiment

/// E[(1 - |X|^2) 4 X_1^2 / (1 - X_1^2)^2] for X uniform in the (n-1)-ball, by tensor
/// Gauss-Legendre after x = sin(theta), r = rho cos(theta). The rule is doubled until two
/// successive values agree to 1e-12 relative.
inline double var_z1_quadrature(int n) {
    if (n < 3) throw InputError("var_z1_quadrature: need n >= 3");
    // density of (r, x) is c (n-2) r^{n-3} with c = vol(B_{n-2}) / vol(B_{n-1})
    const auto log_ball = [](int k) { return 0.5 * k * std::log(std::numbers::pi) - std::lgamma(0.5 * k + 1.0); };
    const double c = std::exp(log_ball(n - 2) - log_ball(n - 1));
    const auto integrate = [&](int nodes) {
        const GaussRule rule = gauss_legendre(nodes);
        double total = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double rho = 0.5 * (rule.nodes[i] + 1.0);
            const double wr = 0.5 * rule.weights[i];
            const double radial = (1.0 - rho * rho) * std::pow(rho, n - 3);
            for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
                const double theta = 0.5 * std::numbers::pi * rule.nodes[j];
                const double wt = 0.5 * std::numbers::pi * rule.weights[j];
                const double s = std::sin(theta);
                total += wr * wt * radial * s * s * std::pow(std::cos(theta), n - 3);
            }
        }
        return 4.0 * c * (n - 2) * total;
    };
    double prev = integrate(8);
    for (int nodes = 16; nodes <= 2048; nodes *= 2) {
        const double cur = integrate(nodes);
        if (std::abs(cur - prev) <= 1e-12 * std::abs(cur)) return cur;
        prev = cur;
    }
    throw NumericError("var_z1_quadrature: did not converge");
}

struct CapsuleOptions {
    std::size_t replicas = 100000;
    std::size_t tau_replicas = 200;
    std::size_t step_cap = 1000000;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct CapsuleReport {
    int n = 0;
    double half_length = 0.0;
    double mean_z1 = 0.0;
    double mean_z1_se = 0.0;
    double var_z1_hat = 0.0;
    double var_z1_se = 0.0;
    double var_z1_quad = 0.0;
    double level = 0.0;
    /// First-passage step counts; censored runs are recorded as step_cap.
    std::vector<std::size_t> tau;
    std::size_t censored = 0;
    double tau_median = 0.0;
};

/// Start point on the lateral surface with x_1 = 0.
inline BoundaryPoint capsule_start(int n) {
    Vector x = Vector::Zero(n);
    x[1] = -1.0;
    return {x, Vector::Unit(n, 1)};
}

/// Increment variance from x_1 = 0 and first passage to x_1 >= L/2 on the unit-radius
/// capsule. Variance replica r uses stream r; passage replica j uses stream replicas + j.
inline CapsuleReport capsule_experiment(int n, double half_length, const CapsuleOptions& opt = {}) {
    if (n < 3) throw InputError("capsule_experiment: need n >= 3");
    if (!(half_length > 0.0)) throw InputError("capsule_experiment: half_length must be positive");
    if (opt.replicas < 2) throw InputError("capsule_experiment: need at least two replicas");
    const ConvexBody body(shape::Capsule{n, half_length, 1.0});
    const BoundaryPoint start = capsule_start(n);

    CapsuleReport out;
    out.n = n;
    out.half_length = half_length;
    out.level = half_length / 2.0;
    out.var_z1_quad = var_z1_quadrature(n);

    std::vector<double> z(opt.replicas);
    parallel_for(opt.replicas, opt.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            RngStream rng(opt.seed, r);
            z[r] = step(body, start, rng).position[0];
        }
    });
    out.mean_z1 = stats::mean(z);
    const auto v = stats::variance_with_se(z);
    out.var_z1_hat = v.mean;
    out.var_z1_se = v.se;
    out.mean_z1_se = std::sqrt(v.mean / static_cast<double>(z.size()));

    out.tau.assign(opt.tau_replicas, 0);
    parallel_for(opt.tau_replicas, opt.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            RngStream rng(opt.seed, opt.replicas + j);
            BoundaryPoint x = start;
            std::size_t k = 0;
            while (x.position[0] < out.level && k < opt.step_cap) {
                const StepRecord rec = step(body, x, rng);
                x = {rec.position, rec.normal};
                ++k;
            }
            out.tau[j] = k;
        }
    });
    for (std::size_t t : out.tau) out.censored += t >= opt.step_cap;
    if (!out.tau.empty()) {
        std::vector<double> sorted(out.tau.begin(), out.tau.end());
        std::sort(sorted.begin(), sorted.end());
        const std::size_t mid = sorted.size() / 2;
        out.tau_median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Relative boundary measure

/// Long-run fraction of recorded states in a region, with a batch-means standard error.
template <class Region>
stats::MeanSe boundary_fraction(std::span<const StepRecord> records, Region&& in_region, std::size_t batches = 50) {
    std::vector<double> hits;
    hits.reserve(records.size());
    for (const auto& r : records) hits.push_back(in_region(r.position) ? 1.0 : 0.0);
    return stats::batch_means(hits, batches);
}

/// Runs the chain and estimates the fraction without storing the trajectory.
template <class Region>
stats::MeanSe boundary_fraction(const ConvexBody& body, const ChainConfig& config, Region&& in_region,
                                std::size_t batches = 50) {
    std::vector<double> hits;
    hits.reserve(config.record_count());
    run(body, config, [&](const StepRecord& r) { hits.push_back(in_region(r.position) ? 1.0 : 0.0); });
    return stats::batch_means(hits, batches);
}

}  // namespace billiard
