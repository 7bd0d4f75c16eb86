#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "spdp/corpus.hpp"

namespace spdp {

class TransformMatrix;

/// Full mutable Gibbs state of the sampler.
///
/// Word positions are flattened group-major, then by document, then by
/// offset. A "cell" is a (group i, topic k, word w) restaurant table list,
/// indexed densely as (i * K + k) * V + w.
///
/// Counts (all derivable from z, r and the table lists):
///   n[d * K + k]        words of document d assigned to topic k
///   m[cell]             customers (word occurrences) in the cell
///   t[cell]             tables in the cell (= tables[cell].size())
///   m_sum[i * K + k]    sum over w of m
///   t_sum[i * K + k]    sum over w of t
///   base_tables[k * V + v]  tables of topic k whose dish is base word v
///   topic_tables[k]     sum over v of base_tables
struct CountState {
    std::size_t num_groups = 0;
    std::size_t num_topics = 0;
    std::size_t vocab_size = 0;

    std::vector<WordId> words;               // per position
    std::vector<std::uint32_t> doc_of;       // per position
    std::vector<std::uint32_t> group_of_doc;
    std::vector<std::size_t> doc_begin;      // num_documents + 1 entries

    std::vector<std::uint32_t> z;
    std::vector<std::uint8_t> r;
    std::unordered_map<std::size_t, std::vector<WordId>> tables;  // non-empty cells only

    std::vector<std::int32_t> n;
    std::vector<std::int32_t> m;
    std::vector<std::int32_t> t;
    std::vector<std::int32_t> m_sum;
    std::vector<std::int32_t> t_sum;
    std::vector<std::int32_t> base_tables;
    std::vector<std::int32_t> topic_tables;

    /// Layout for `corpus` with every count zero and every z = 0, r = 0.
    CountState(const Corpus& corpus, std::size_t topics);
    CountState() = default;

    std::size_t num_positions() const { return words.size(); }
    std::size_t num_documents() const { return group_of_doc.size(); }
    std::size_t num_cells() const { return num_groups * num_topics * vocab_size; }
    std::uint32_t group_of(std::size_t pos) const { return group_of_doc[doc_of[pos]]; }
    std::size_t doc_length(std::size_t d) const { return doc_begin[d + 1] - doc_begin[d]; }

    std::size_t cell(std::size_t group, std::size_t topic, WordId w) const {
        return (group * num_topics + topic) * vocab_size + w;
    }
    std::size_t doc_topic(std::size_t doc, std::size_t topic) const { return doc * num_topics + topic; }
    std::size_t group_topic(std::size_t group, std::size_t topic) const { return group * num_topics + topic; }
    std::size_t topic_word(std::size_t topic, WordId v) const { return topic * vocab_size + v; }

    /// q_{ikwv}: tables of cell (i,k,w) whose dish is v.
    std::int32_t q(std::size_t group, std::size_t topic, WordId w, WordId v) const;

    /// Largest number of occurrences of one word inside one group; bounds
    /// every m[cell].
    std::size_t max_cell_customers() const;

    bool operator==(const CountState&) const = default;
};

/// Recomputes n, m, t and every cached sum from z and the table lists.
void recount(CountState& state);

struct ConsistencyOptions {
    /// Also require that the r indicators of each cell add up to t.
    bool check_indicators = true;
};

/// Every violated consistency rule, one human-readable line each. Empty when
/// the state is consistent. `transform` (optional) additionally checks that
/// every dish lies in the support of its row.
std::vector<std::string> consistency_violations(const CountState& state, const TransformMatrix* transform = nullptr,
                                                ConsistencyOptions options = {});

/// Throws IntegrityError listing the first violations.
void require_consistent(const CountState& state, const TransformMatrix* transform = nullptr,
                        ConsistencyOptions options = {});

/// Makes the number of r = 1 positions of every cell equal t, flipping the
/// fewest indicators (earliest positions first). Returns the number of flips.
std::size_t reconcile_indicators(CountState& state);

}  // namespace spdp
