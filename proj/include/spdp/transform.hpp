#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "spdp/corpus.hpp"

namespace spdp {

struct TransformEntry {
    WordId column;
    double value;
};

struct TransformTriplet {
    std::size_t group;
    WordId row;
    WordId column;
    double value;
};

/// Per-group sparse V x V word-association matrices P^i. Every row and every
/// column sums to one, and no row or column holds more than
/// `max_nonzeros` entries.
class TransformMatrix {
public:
    static constexpr std::size_t default_max_nonzeros = 32;

    TransformMatrix() = default;

    static TransformMatrix identity(std::size_t groups, std::size_t vocab_size);

    /// Builds and validates a matrix from triplets. Groups with no triplets
    /// are identity. Zero-valued triplets are dropped; duplicates are summed.
    static TransformMatrix from_triplets(std::size_t groups, std::size_t vocab_size,
                                         const std::vector<TransformTriplet>& triplets,
                                         std::size_t max_nonzeros = default_max_nonzeros);

    std::span<const TransformEntry> row(std::size_t group, WordId w) const;
    double value(std::size_t group, WordId w, WordId v) const;

    bool is_identity() const;
    bool group_is_identity(std::size_t group) const { return groups_[group].identity; }
    std::size_t num_groups() const { return groups_.size(); }
    std::size_t vocab_size() const { return vocab_size_; }
    std::size_t max_row_nonzeros() const;

    /// All nonzero entries of non-identity groups, in (group, row) order.
    std::vector<TransformTriplet> triplets() const;

private:
    struct GroupRows {
        bool identity = true;
        std::vector<std::size_t> offsets;  // size V + 1 when not identity
        std::vector<TransformEntry> entries;
    };

    std::size_t vocab_size_ = 0;
    std::vector<GroupRows> groups_;
    std::vector<TransformEntry> identity_rows_;  // entry w is {w, 1}
};

}  // namespace spdp
