#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "billiard/errors.hpp"
#include "billiard/geometry.hpp"
#include "billiard/planar.hpp"
#include "billiard/rng.hpp"
#include "billiard/sampler.hpp"

namespace billiard {

/// Directions with n_x . w below this are treated as grazing and resampled.
inline constexpr double kGrazingCosine = 1e-12;

struct StepRecord {
    std::uint64_t index = 0;
    Vector position;       // the new state y
    Vector normal;         // inward normal at y
    double chord = 0.0;    // ||x - y||
    double cos_out = 0.0;  // n_x . (y - x) / ||y - x||
    double cos_in = 0.0;   // n_y . (x - y) / ||x - y||
};

/// Everything needed to resume a chain bit-exactly.
struct ChainState {
    BoundaryPoint position;
    RngStream rng;
    std::uint64_t steps_taken = 0;
};

struct ChainConfig {
    std::optional<BoundaryPoint> start;  // empty: ConvexBody::extreme_point()
    std::uint64_t steps = 1;
    std::uint64_t burn_in = 1000;
    std::uint64_t thin = 1;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    DirectionLaw law = DirectionLaw::cosine;

    void validate() const {
        if (steps == 0) throw InputError("chain: steps must be positive");
        if (thin == 0) throw InputError("chain: thin must be >= 1");
    }

    /// Records emitted by run(): floor((steps - burn_in) / thin), or zero.
    std::uint64_t record_count() const { return steps > burn_in ? (steps - burn_in) / thin : 0; }
};

/// One billiard step from x: shoot a chord in a random direction and land on the far side.
/// Two-sided laws are folded onto the inward hemisphere, since w and -w span the same line.
inline StepRecord step(const ConvexBody& body, const BoundaryPoint& x, RngStream& rng,
                       DirectionLaw law = DirectionLaw::cosine) {
    Vector w;
    double cos_out = 0.0;
    for (int attempt = 0;; ++attempt) {
        if (attempt > 1000) throw GeometryError("step: could not sample a non-grazing direction");
        w = sample_direction(x, law, rng);
        cos_out = w.dot(x.normal);
        if (cos_out < 0.0) {
            w = -w;
            cos_out = -cos_out;
        }
        if (cos_out >= kGrazingCosine) break;
    }
    const BoundaryPoint y = body.ray_exit(x, w);
    const Vector chord_vec = y.position - x.position;
    StepRecord rec;
    rec.chord = chord_vec.norm();
    rec.cos_out = x.normal.dot(chord_vec) / rec.chord;
    rec.cos_in = -y.normal.dot(chord_vec) / rec.chord;
    rec.position = y.position;
    rec.normal = y.normal;
    return rec;
}

class Chain {
public:
    Chain(const ConvexBody& body, ChainState state, DirectionLaw law = DirectionLaw::cosine)
        : body_(&body), state_(std::move(state)), law_(law) {}

    Chain(const ConvexBody& body, const ChainConfig& config)
        : body_(&body),
          state_{config.start ? *config.start : body.extreme_point(), RngStream(config.seed, config.stream), 0},
          law_(config.law) {}

    StepRecord advance() {
        StepRecord rec = step(*body_, state_.position, state_.rng, law_);
        state_.position = BoundaryPoint{rec.position, rec.normal};
        rec.index = ++state_.steps_taken;
        return rec;
    }

    const ChainState& state() const { return state_; }
    const BoundaryPoint& position() const { return state_.position; }

private:
    const ConvexBody* body_;
    ChainState state_;
    DirectionLaw law_;
};

/// Runs the configured chain, passing every retained record to `sink`. Returns the
/// final state for checkpointing.
template <class Sink>
ChainState run(const ConvexBody& body, const ChainConfig& config, Sink&& sink) {
    config.validate();
    Chain chain(body, config);
    for (std::uint64_t k = 1; k <= config.steps; ++k) {
        StepRecord rec = chain.advance();
        if (k > config.burn_in && (k - config.burn_in) % config.thin == 0) sink(rec);
    }
    return chain.state();
}

inline std::vector<StepRecord> run(const ConvexBody& body, const ChainConfig& config) {
    std::vector<StepRecord> out;
    out.reserve(static_cast<std::size_t>(config.record_count()));
    run(body, config, [&](const StepRecord& r) { out.push_back(r); });
    return out;
}

/// Continues a checkpointed chain for `steps` more steps.
template <class Sink>
ChainState resume(const ConvexBody& body, ChainState state, std::uint64_t steps, DirectionLaw law, Sink&& sink) {
    Chain chain(body, std::move(state), law);
    for (std::uint64_t k = 0; k < steps; ++k) sink(chain.advance());
    return chain.state();
}

enum class KernelNorm {
    none,        // cos(phi_uv) cos(phi_vu) / |u - v|^{n-1}
    surface,     // probability density of the next state w.r.t. surface measure dv
    stationary,  // density w.r.t. the uniform law pi on the boundary
};

/// One-step transition density between two boundary points. With respect to surface
/// measure the cosine-law kernel is cos cos / (vol(B_{n-1}) |u - v|^{n-1}).
inline double kernel_density(const ConvexBody& body, const BoundaryPoint& u, const BoundaryPoint& v,
                             KernelNorm norm = KernelNorm::none) {
    if (u.dim() != body.dim() || v.dim() != body.dim()) throw InputError("kernel_density: dimension mismatch");
    const Vector d = v.position - u.position;
    const double len = d.norm();
    if (!(len > 0.0)) throw DomainError("kernel_density: singular at u == v");
    const int n = body.dim();
    const double cu = std::max(0.0, u.normal.dot(d) / len);
    const double cv = std::max(0.0, -v.normal.dot(d) / len);
    double value = cu * cv / std::pow(len, n - 1);
    if (norm == KernelNorm::none) return value;
    // 1 / vol(B_{n-1}) = Gamma((n+1)/2) / pi^{(n-1)/2}
    value *= std::exp(std::lgamma(0.5 * (n + 1)) - 0.5 * (n - 1) * std::log(std::numbers::pi));
    if (norm == KernelNorm::stationary) value *= surface_volume(body);
    return value;
}

}  // namespace billiard
