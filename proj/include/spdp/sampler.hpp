#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "spdp/count_state.hpp"
#include "spdp/hyperparameters.hpp"
#include "spdp/numerics.hpp"
#include "spdp/transform.hpp"

namespace spdp {

/// Immutable bundle of everything a sampling step reads besides the state.
class SamplerContext {
public:
    SamplerContext(const Hyperparameters& hyper, const TransformMatrix& transform, const StirlingCache& stirling);

    const Hyperparameters& hyper() const { return *hyper_; }
    const TransformMatrix& transform() const { return *transform_; }
    const StirlingCache& stirling() const { return *stirling_; }
    double beta_sum() const { return beta_sum_; }

private:
    const Hyperparameters* hyper_;
    const TransformMatrix* transform_;
    const StirlingCache* stirling_;
    double beta_sum_;
};

/// Smallest Stirling cache bound that can serve every sampling step on
/// `state` (largest per-group word frequency + 2).
std::size_t required_stirling_size(const CountState& state);

/// Outcome of one blocked draw: topic, whether the word opened a new table,
/// and the dish (base word) of that table.
struct Choice {
    std::uint32_t topic = 0;
    bool new_table = false;
    WordId dish = 0;

    bool operator==(const Choice&) const = default;
};

/// What remove_word took out, sufficient to put it back exactly.
struct RemovalRecord {
    std::uint32_t topic = 0;
    bool removed_table = false;
    std::size_t table_index = 0;
    WordId dish = 0;
    std::uint8_t prior_indicator = 0;
};

/// Proposal weights for one word: one (topic, stay) entry per topic followed
/// by one (topic, new table, dish) entry per nonzero of the transform row.
struct Proposals {
    std::vector<double> log_weights;
    std::vector<Choice> choices;
};

/// Counts of one topic as seen by the word being resampled (the word itself
/// already removed).
struct TopicCounts {
    std::int64_t doc_topic = 0;        // n_{idk}
    std::int64_t cell_customers = 0;   // m_{ikw}
    std::int64_t cell_tables = 0;      // t_{ikw}
    std::int64_t topic_customers = 0;  // m_{ik.}
    std::int64_t topic_tables = 0;     // t_{ik.}
    std::int64_t base_total = 0;       // T_k
};

/// Log-weight pieces for one topic.
///   join    weight of sitting at an existing table (-inf if impossible)
///   open    weight of opening a table, without the dish-dependent factor
///           p_{w,v} (beta_v + Q_{kv})
///   forced  the cell has customers but no table left; only `open` is
///           possible and the zero-valued S^m_0 normalizer is dropped
struct TopicLogTerms {
    double join;
    double open;
    bool forced;
};

TopicLogTerms topic_log_terms(const TopicCounts& counts, double alpha, double discount, double concentration,
                              double beta_sum, const StirlingTable& stirling);

/// Full log-weight of opening a table with dish v.
inline double dish_log_weight(double open, double transform_value, double beta_v, std::int64_t base_count) {
    return open + std::log(transform_value) + std::log(beta_v + static_cast<double>(base_count));
}

/// Random topics, then one sequential pass seating every word by the
/// generative restaurant rule (first customer of a cell always opens a
/// table).
CountState init_state(const Corpus& corpus, const Hyperparameters& hyper, const TransformMatrix& transform,
                      std::uint64_t seed);

/// Takes the word at `pos` out of the counts. Draws r ~ Bernoulli(t/m) for
/// its cell and, when r = 1, removes a uniformly chosen table from the cell.
/// The stored indicator r[pos] is left untouched.
RemovalRecord remove_word(CountState& state, std::size_t pos, RngStream& rng);

/// Reverses remove_word exactly, including table order and r[pos].
void undo_removal(CountState& state, std::size_t pos, const RemovalRecord& record);

/// Fills `out` with the blocked-conditional log-weights of the removed word
/// at `pos`.
void compute_proposals(const CountState& state, std::size_t pos, const SamplerContext& ctx, Proposals& out);

/// Puts the removed word at `pos` back with `choice`. Throws DomainError for
/// impossible choices (joining a cell without tables, or a dish outside the
/// transform row).
void add_word(CountState& state, std::size_t pos, const Choice& choice, const TransformMatrix& transform);

/// Scratch buffers reused across sampling steps.
struct SweepWorkspace {
    Proposals proposals;
    std::vector<double> scratch;
};

/// One blocked Gibbs step: remove, propose, sample, add.
void resample_word(CountState& state, std::size_t pos, const SamplerContext& ctx, RngStream& rng,
                   SweepWorkspace& work);

/// One full sweep over `order` (every position once). The draws for the
/// j-th visited position come from the stream keyed (seed, iteration, j).
/// Table indicators are reconciled with t at the end.
void gibbs_sweep(CountState& state, const SamplerContext& ctx, std::uint64_t seed, std::uint64_t iteration,
                 std::span<const std::uint32_t> order);

/// Sweep in corpus order.
void gibbs_sweep(CountState& state, const SamplerContext& ctx, std::uint64_t seed, std::uint64_t iteration);

/// Identity order 0..N-1.
std::vector<std::uint32_t> corpus_order(const CountState& state);

}  // namespace spdp
