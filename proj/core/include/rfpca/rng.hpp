#pragma once

// Counter-based random streams.
//
// Every random quantity in the library is drawn from a Philox4x32-10 block
// cipher keyed by the 64-bit master seed. The 128-bit counter is split into a
// 64-bit stream id (high half) and a 64-bit block index (low half), so any
// (seed, stream) pair gives an independent reproducible sequence regardless of
// the order in which streams are consumed. Stream ids are built with
// `derive_stream` from a tag and integer indices (replication, subject, ...).
//
// Gaussian variates use Box-Muller on our own uniforms rather than
// std::normal_distribution, whose output is implementation-defined.

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <string_view>

namespace rfpca {

inline constexpr std::string_view kRngAlgorithm = "philox4x32-10/box-muller/v1";

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Stable id for a named sub-stream, e.g. derive_stream("subject", {rep, i}).
constexpr std::uint64_t derive_stream(std::string_view tag,
                                      std::initializer_list<std::uint64_t> indices) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a over the tag
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    for (std::uint64_t v : indices) h = splitmix64(h ^ splitmix64(v));
    return h;
}

class Philox4x32 {
public:
    using result_type = std::uint64_t;

    Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (lane_ == 2) {
            block_ = generate(counter_++);
            lane_ = 0;
        }
        const auto lo = static_cast<std::uint64_t>(block_[2 * lane_]);
        const auto hi = static_cast<std::uint64_t>(block_[2 * lane_ + 1]);
        ++lane_;
        return (hi << 32) | lo;
    }

private:
    std::array<std::uint32_t, 4> generate(std::uint64_t index) const noexcept {
        std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(index),
                                         static_cast<std::uint32_t>(index >> 32),
                                         static_cast<std::uint32_t>(stream_),
                                         static_cast<std::uint32_t>(stream_ >> 32)};
        std::array<std::uint32_t, 2> key = key_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
            key[0] += 0x9E3779B9u;
            key[1] += 0xBB67AE85u;
        }
        return ctr;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int lane_ = 2;
};

/// Convenience sampler over a Philox stream.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream) noexcept : engine_(seed, stream) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

    double exponential(double rate = 1.0) noexcept {
        double u = uniform();
        while (u <= 0.0) u = uniform();
        return -std::log(u) / rate;
    }

    /// Uniform integer in [0, bound) without modulo bias.
    std::uint64_t below(std::uint64_t bound) noexcept {
        const std::uint64_t limit = max_multiple(bound);
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % bound;
    }

    Philox4x32& engine() noexcept { return engine_; }

private:
    static std::uint64_t max_multiple(std::uint64_t bound) noexcept {
        const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
        return max - (max % bound + 1) % bound;
    }

    Philox4x32 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace rfpca
