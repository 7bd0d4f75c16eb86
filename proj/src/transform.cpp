#include "spdp/transform.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "spdp/errors.hpp"

namespace spdp {

namespace {
constexpr double sum_tolerance = 1e-9;
}

TransformMatrix TransformMatrix::identity(std::size_t groups, std::size_t vocab_size) {
    TransformMatrix p;
    p.vocab_size_ = vocab_size;
    p.groups_.resize(groups);
    p.identity_rows_.reserve(vocab_size);
    for (std::size_t w = 0; w < vocab_size; ++w) p.identity_rows_.push_back({static_cast<WordId>(w), 1.0});
    return p;
}

TransformMatrix TransformMatrix::from_triplets(std::size_t groups, std::size_t vocab_size,
                                               const std::vector<TransformTriplet>& triplets,
                                               std::size_t max_nonzeros) {
    TransformMatrix p = identity(groups, vocab_size);
    std::vector<std::map<std::pair<WordId, WordId>, double>> cells(groups);
    for (const auto& t : triplets) {
        if (t.group >= groups || t.row >= vocab_size || t.column >= vocab_size)
            throw ConfigError("transform entry out of range");
        if (!(t.value >= 0.0) || !std::isfinite(t.value)) throw ConfigError("transform entries must be non-negative");
        if (t.value > 0.0) cells[t.group][{t.row, t.column}] += t.value;
    }

    for (std::size_t g = 0; g < groups; ++g) {
        if (cells[g].empty()) continue;
        auto& rows = p.groups_[g];
        rows.offsets.assign(vocab_size + 1, 0);
        std::vector<double> row_sum(vocab_size, 0.0), col_sum(vocab_size, 0.0);
        std::vector<std::size_t> col_count(vocab_size, 0);
        bool identity = cells[g].size() == vocab_size;
        for (const auto& [key, value] : cells[g]) {
            ++rows.offsets[key.first + 1];
            row_sum[key.first] += value;
            col_sum[key.second] += value;
            ++col_count[key.second];
            identity = identity && key.first == key.second && value == 1.0;
        }
        for (std::size_t w = 0; w < vocab_size; ++w) {
            if (std::abs(row_sum[w] - 1.0) > sum_tolerance || std::abs(col_sum[w] - 1.0) > sum_tolerance)
                throw ConfigError("transform for group " + std::to_string(g) + " is not doubly stochastic at word " +
                                  std::to_string(w));
            if (rows.offsets[w + 1] > max_nonzeros || col_count[w] > max_nonzeros)
                throw ConfigError("transform for group " + std::to_string(g) + " exceeds " +
                                  std::to_string(max_nonzeros) + " nonzeros at word " + std::to_string(w));
            rows.offsets[w + 1] += rows.offsets[w];
        }
        if (identity) {
            rows.offsets.clear();
            continue;
        }
        rows.identity = false;
        rows.entries.reserve(cells[g].size());
        for (const auto& [key, value] : cells[g]) rows.entries.push_back({key.second, value});
    }
    return p;
}

std::span<const TransformEntry> TransformMatrix::row(std::size_t group, WordId w) const {
    const auto& rows = groups_[group];
    if (rows.identity) return {&identity_rows_[w], 1};
    return {rows.entries.data() + rows.offsets[w], rows.offsets[w + 1] - rows.offsets[w]};
}

double TransformMatrix::value(std::size_t group, WordId w, WordId v) const {
    for (const auto& e : row(group, w))
        if (e.column == v) return e.value;
    return 0.0;
}

bool TransformMatrix::is_identity() const {
    return std::all_of(groups_.begin(), groups_.end(), [](const GroupRows& g) { return g.identity; });
}

std::size_t TransformMatrix::max_row_nonzeros() const {
    std::size_t best = groups_.empty() ? 0 : 1;
    for (const auto& g : groups_)
        for (std::size_t w = 0; !g.identity && w < vocab_size_; ++w)
            best = std::max(best, g.offsets[w + 1] - g.offsets[w]);
    return best;
}

std::vector<TransformTriplet> TransformMatrix::triplets() const {
    std::vector<TransformTriplet> out;
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        if (groups_[g].identity) continue;
        for (std::size_t w = 0; w < vocab_size_; ++w)
            for (const auto& e : row(g, static_cast<WordId>(w)))
                out.push_back({g, static_cast<WordId>(w), e.column, e.value});
    }
    return out;
}

}  // namespace spdp
