#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "spdp/rng.hpp"

namespace spdp {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)) without overflow; either side may be -inf.
double log_add(double a, double b) noexcept;

/// Log-space table of generalized Stirling numbers S^N_{M,a} for one
/// discount a, 0 <= M <= N <= max_n, built from
///   S^{N+1}_M = S^N_{M-1} + (N - M a) S^N_M,  S^0_0 = 1,
/// with S^N_M = 0 for M > N and S^N_0 = 0 for N >= 1 (stored as -inf).
/// Immutable after construction.
class StirlingTable {
public:
    StirlingTable(double discount, std::size_t max_n);

    /// log S^N_{M,a}. Throws CacheOverflowError when N > max_n().
    double log(std::size_t n, std::size_t m) const;

    double discount() const noexcept { return discount_; }
    std::size_t max_n() const noexcept { return max_n_; }

private:
    static std::size_t row_offset(std::size_t n) noexcept { return n * (n + 1) / 2; }

    double discount_;
    std::size_t max_n_;
    std::vector<double> values_;  // packed lower triangle, row n holds M = 0..n
};

/// Stirling tables for every topic's discount; topics sharing a discount
/// share one table.
class StirlingCache {
public:
    StirlingCache(std::span<const double> discounts, std::size_t max_n);

    const StirlingTable& for_topic(std::size_t topic) const { return *tables_[by_topic_[topic]]; }
    std::size_t max_n() const noexcept { return max_n_; }

private:
    std::size_t max_n_;
    std::vector<std::unique_ptr<StirlingTable>> tables_;
    std::vector<std::size_t> by_topic_;
};

/// log of the Pochhammer symbol (x|y)_N = prod_{n<N} (x + n y).
/// Throws DomainError if any factor is non-positive.
double pochhammer_log(double x, double y, std::size_t n);

/// Max-shifted softmax of log-weights; -inf entries map to 0 and the result
/// sums to 1. Throws DegenerateDistributionError if no entry is finite.
std::vector<double> normalize_log_weights(std::span<const double> log_weights);

/// Draws an index with probability proportional to exp(log_weights[i]).
std::size_t sample_categorical(std::span<const double> log_weights, RngStream& rng);

/// Same as above, reusing `scratch` for the shifted weights.
std::size_t sample_categorical(std::span<const double> log_weights, RngStream& rng,
                               std::vector<double>& scratch);

}  // namespace spdp
