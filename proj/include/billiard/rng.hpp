#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace billiard {

/// Philox4x32-10 counter-based generator.
///
/// A stream is identified by (seed, stream index); the n-th 64-bit output is a
/// pure function of (seed, stream, n). Checkpointing therefore only needs the
/// counter, and distinct stream indices never share blocks.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream() = default;
    RngStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter = 0)
        : seed_(seed), stream_(stream), counter_(counter) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const std::uint64_t block = counter_ >> 1;
        if (!cache_valid_ || cached_block_ != block) {
            cache_ = philox4x32_10(
                {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
                 static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
            cached_block_ = block;
            cache_valid_ = true;
        }
        const unsigned half = static_cast<unsigned>(counter_ & 1u);
        ++counter_;
        return (static_cast<std::uint64_t>(cache_[2 * half + 1]) << 32) | cache_[2 * half];
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_pos() { return (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (one variate per two uniforms, no caching so
    /// that the counter alone captures the state).
    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }
    std::uint64_t counter() const { return counter_; }

    /// Derived stream sharing the seed; used to hand out per-replica streams.
    RngStream substream(std::uint64_t index) const { return RngStream(seed_, index); }

    friend bool operator==(const RngStream& a, const RngStream& b) {
        return a.seed_ == b.seed_ && a.stream_ == b.stream_ && a.counter_ == b.counter_;
    }

    /// One Philox4x32-10 block; exposed for known-answer tests.
    static std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                      std::array<std::uint32_t, 2> key) {
        constexpr std::uint32_t kMul0 = 0xD2511F53u;
        constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
        constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
        constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
        std::uint32_t k0 = key[0];
        std::uint32_t k1 = key[1];

        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
            k0 += kWeyl0;
            k1 += kWeyl1;
        }
        return ctr;
    }

private:
    std::uint64_t seed_ = 0;
    std::uint64_t stream_ = 0;
    std::uint64_t counter_ = 0;

    // derived cache, not part of the logical state
    std::array<std::uint32_t, 4> cache_{};
    std::uint64_t cached_block_ = 0;
    bool cache_valid_ = false;
};

}  // namespace billiard
