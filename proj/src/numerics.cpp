#include "spdp/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spdp/errors.hpp"

namespace spdp {

double log_add(double a, double b) noexcept {
    if (a == neg_inf) return b;
    if (b == neg_inf) return a;
    return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

StirlingTable::StirlingTable(double discount, std::size_t max_n) : discount_(discount), max_n_(max_n) {
    if (!(discount >= 0.0 && discount < 1.0))
        throw DomainError("Stirling discount must lie in [0, 1), got " + std::to_string(discount));
    values_.assign(row_offset(max_n + 1), neg_inf);
    values_[0] = 0.0;
    for (std::size_t n = 0; n < max_n; ++n) {
        const double* row = &values_[row_offset(n)];
        double* next = &values_[row_offset(n + 1)];
        for (std::size_t m = 0; m <= n + 1; ++m) {
            double from_new = m >= 1 ? row[m - 1] : neg_inf;
            double from_same = neg_inf;
            if (m <= n) {
                const double coef = static_cast<double>(n) - static_cast<double>(m) * discount;
                if (coef > 0.0 && row[m] != neg_inf) from_same = std::log(coef) + row[m];
            }
            next[m] = log_add(from_new, from_same);
        }
    }
}

double StirlingTable::log(std::size_t n, std::size_t m) const {
    if (n > max_n_)
        throw CacheOverflowError("Stirling number S^" + std::to_string(n) + " requested but cache holds N <= " +
                                 std::to_string(max_n_));
    if (m > n) return neg_inf;
    return values_[row_offset(n) + m];
}

StirlingCache::StirlingCache(std::span<const double> discounts, std::size_t max_n) : max_n_(max_n) {
    by_topic_.reserve(discounts.size());
    std::vector<double> seen;
    for (double a : discounts) {
        auto it = std::find(seen.begin(), seen.end(), a);
        if (it == seen.end()) {
            tables_.push_back(std::make_unique<StirlingTable>(a, max_n));
            seen.push_back(a);
            by_topic_.push_back(tables_.size() - 1);
        } else {
            by_topic_.push_back(static_cast<std::size_t>(it - seen.begin()));
        }
    }
}

double pochhammer_log(double x, double y, std::size_t n) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double factor = x + static_cast<double>(i) * y;
        if (!(factor > 0.0))
            throw DomainError("Pochhammer factor x + n*y is non-positive at n = " + std::to_string(i));
        total += std::log(factor);
    }
    return total;
}

namespace {

double shifted_weights(std::span<const double> log_weights, std::vector<double>& out) {
    double top = neg_inf;
    for (double lw : log_weights)
        if (lw > top) top = lw;
    if (top == neg_inf || std::isnan(top))
        throw DegenerateDistributionError("categorical distribution has no positive weight");
    out.resize(log_weights.size());
    double total = 0.0;
    for (std::size_t i = 0; i < log_weights.size(); ++i) {
        out[i] = log_weights[i] == neg_inf ? 0.0 : std::exp(log_weights[i] - top);
        total += out[i];
    }
    return total;
}

}  // namespace

std::vector<double> normalize_log_weights(std::span<const double> log_weights) {
    std::vector<double> p;
    double total = shifted_weights(log_weights, p);
    for (double& x : p) x /= total;
    // One more pass so the sum is 1 up to a single rounding.
    total = 0.0;
    for (double x : p) total += x;
    for (double& x : p) x /= total;
    return p;
}

std::size_t sample_categorical(std::span<const double> log_weights, RngStream& rng) {
    std::vector<double> scratch;
    return sample_categorical(log_weights, rng, scratch);
}

std::size_t sample_categorical(std::span<const double> log_weights, RngStream& rng,
                               std::vector<double>& scratch) {
    const double total = shifted_weights(log_weights, scratch);
    double u = rng.uniform() * total;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < scratch.size(); ++i) {
        if (scratch[i] <= 0.0) continue;
        last_positive = i;
        if (u < scratch[i]) return i;
        u -= scratch[i];
    }
    return last_positive;  // rounding fell off the end
}

}  // namespace spdp
