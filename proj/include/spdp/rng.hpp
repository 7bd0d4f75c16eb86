#pragma once

#include <cstdint>
#include <limits>

namespace spdp {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based random stream. Output i of stream (seed, id) is a pure
/// function of (seed, id, i), so streams can be created per work item and
/// replayed regardless of which thread runs them. Single owner.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
        : key_(mix64(seed ^ mix64(stream_id ^ 0x5851f42d4c957f2dULL))) {}

    /// Stream keyed by a domain tag and two indices, e.g. (iteration, slot).
    static RngStream keyed(std::uint64_t seed, std::uint64_t domain, std::uint64_t a,
                           std::uint64_t b = 0) noexcept {
        return RngStream(seed, mix64(mix64(domain) ^ mix64(a + 0x632be59bd9b4e019ULL)) ^ b);
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    /// Uniform double in [0, 1).
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n) noexcept {
        // Lemire's multiply-shift; bias is < n / 2^64.
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>((*this)()) * n) >> 64);
    }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    std::uint64_t draws() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Stream domains used across the library so that no two purposes share a
/// stream.
namespace stream_domain {
inline constexpr std::uint64_t init = 1;
inline constexpr std::uint64_t sweep = 2;
inline constexpr std::uint64_t holdout = 3;
inline constexpr std::uint64_t partition = 4;
inline constexpr std::uint64_t fold_in = 5;
inline constexpr std::uint64_t reconcile = 6;
}  // namespace stream_domain

}  // namespace spdp
