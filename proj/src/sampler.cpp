#include "spdp/sampler.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "spdp/errors.hpp"

namespace spdp {

SamplerContext::SamplerContext(const Hyperparameters& hyper, const TransformMatrix& transform,
                               const StirlingCache& stirling)
    : hyper_(&hyper), transform_(&transform), stirling_(&stirling), beta_sum_(hyper.beta_sum()) {}

std::size_t required_stirling_size(const CountState& state) { return state.max_cell_customers() + 2; }

TopicLogTerms topic_log_terms(const TopicCounts& c, double alpha, double discount, double concentration,
                              double beta_sum, const StirlingTable& stirling) {
    const auto m = static_cast<std::size_t>(c.cell_customers);
    const auto t = static_cast<std::size_t>(c.cell_tables);
    const double md = static_cast<double>(m);
    const double td = static_cast<double>(t);
    const double shared = std::log(alpha + static_cast<double>(c.doc_topic)) -
                          std::log(concentration + static_cast<double>(c.topic_customers));
    const bool forced = m >= 1 && t == 0;
    const double normalizer = forced ? 0.0 : stirling.log(m, t);

    TopicLogTerms terms{neg_inf, neg_inf, forced};
    if (t >= 1)
        terms.join = shared + std::log(md - td + 1.0) - std::log(md + 1.0) + stirling.log(m + 1, t) - normalizer;
    terms.open = shared + std::log(concentration + discount * static_cast<double>(c.topic_tables)) +
                 std::log(td + 1.0) - std::log(md + 1.0) -
                 std::log(beta_sum + static_cast<double>(c.base_total)) + stirling.log(m + 1, t + 1) - normalizer;
    return terms;
}

namespace {

TopicCounts counts_for(const CountState& s, std::size_t doc, std::size_t group, std::size_t k, WordId w) {
    const auto c = s.cell(group, k, w);
    const auto gk = s.group_topic(group, k);
    return {s.n[s.doc_topic(doc, k)], s.m[c], s.t[c], s.m_sum[gk], s.t_sum[gk], s.topic_tables[k]};
}

}  // namespace

CountState init_state(const Corpus& corpus, const Hyperparameters& hyper, const TransformMatrix& transform,
                      std::uint64_t seed) {
    hyper.validate(corpus.num_groups(), corpus.vocab_size());
    CountState s(corpus, hyper.topics);
    const double beta_sum = hyper.beta_sum();
    auto rng = RngStream::keyed(seed, stream_domain::init, 0);

    for (std::size_t p = 0; p < s.num_positions(); ++p) {
        const auto k = static_cast<std::uint32_t>(rng.below(hyper.topics));
        const auto i = s.group_of(p);
        const WordId w = s.words[p];
        const auto c = s.cell(i, k, w);
        const auto row = transform.row(i, w);

        // Base-measure weight of each candidate dish under the current counts.
        double base_mass = 0.0;
        for (const auto& e : row)
            base_mass += e.value * (hyper.beta[e.column] + s.base_tables[s.topic_word(k, e.column)]);

        bool open = true;
        if (s.m[c] > 0) {
            const double a = hyper.discount[k];
            const double b = hyper.concentration[k];
            const double new_weight = (b + a * s.t_sum[s.group_topic(i, k)]) * base_mass /
                                      (beta_sum + s.topic_tables[k]);
            const double old_weight = s.m[c] - a * s.t[c];
            open = rng.uniform() * (new_weight + old_weight) < new_weight;
        }

        WordId dish = row.front().column;
        if (open && row.size() > 1) {
            double u = rng.uniform() * base_mass;
            for (const auto& e : row) {
                dish = e.column;
                const double wgt = e.value * (hyper.beta[e.column] + s.base_tables[s.topic_word(k, e.column)]);
                if (u < wgt) break;
                u -= wgt;
            }
        }
        add_word(s, p, {k, open, dish}, transform);
    }
    return s;
}

RemovalRecord remove_word(CountState& s, std::size_t pos, RngStream& rng) {
    const auto k = s.z[pos];
    const auto i = s.group_of(pos);
    const WordId w = s.words[pos];
    const auto c = s.cell(i, k, w);
    const auto m = s.m[c];
    const auto t = s.t[c];
    if (m < 1 || t < 1 || t > m)
        throw IntegrityError("cannot remove word at position " + std::to_string(pos) + ": cell has m = " +
                             std::to_string(m) + ", t = " + std::to_string(t));

    RemovalRecord rec;
    rec.topic = k;
    rec.prior_indicator = s.r[pos];
    rec.removed_table = rng.bernoulli(static_cast<double>(t) / static_cast<double>(m));

    --s.n[s.doc_topic(s.doc_of[pos], k)];
    --s.m[c];
    --s.m_sum[s.group_topic(i, k)];
    if (rec.removed_table) {
        // Uniform over the t tables present before the removal.
        rec.table_index = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(t)));
        auto it = s.tables.find(c);
        if (it == s.tables.end() || it->second.size() != static_cast<std::size_t>(t))
            throw IntegrityError("table list of position " + std::to_string(pos) + " disagrees with t");
        auto& dishes = it->second;
        rec.dish = dishes[rec.table_index];
        dishes.erase(dishes.begin() + static_cast<std::ptrdiff_t>(rec.table_index));
        if (dishes.empty()) s.tables.erase(it);
        --s.t[c];
        --s.t_sum[s.group_topic(i, k)];
        --s.base_tables[s.topic_word(k, rec.dish)];
        --s.topic_tables[k];
    }
    return rec;
}

void undo_removal(CountState& s, std::size_t pos, const RemovalRecord& rec) {
    const auto k = rec.topic;
    const auto i = s.group_of(pos);
    const auto c = s.cell(i, k, s.words[pos]);
    ++s.n[s.doc_topic(s.doc_of[pos], k)];
    ++s.m[c];
    ++s.m_sum[s.group_topic(i, k)];
    if (rec.removed_table) {
        auto& dishes = s.tables[c];
        dishes.insert(dishes.begin() + static_cast<std::ptrdiff_t>(rec.table_index), rec.dish);
        ++s.t[c];
        ++s.t_sum[s.group_topic(i, k)];
        ++s.base_tables[s.topic_word(k, rec.dish)];
        ++s.topic_tables[k];
    }
    s.z[pos] = k;
    s.r[pos] = rec.prior_indicator;
}

void compute_proposals(const CountState& s, std::size_t pos, const SamplerContext& ctx, Proposals& out) {
    const auto& hyper = ctx.hyper();
    const auto i = s.group_of(pos);
    const auto d = s.doc_of[pos];
    const WordId w = s.words[pos];
    const auto row = ctx.transform().row(i, w);
    const std::size_t K = s.num_topics;
    const std::size_t stride = 1 + row.size();

    out.log_weights.resize(K * stride);
    out.choices.resize(K * stride);
    bool any_forced = false;
    for (std::size_t k = 0; k < K; ++k) {
        const auto terms = topic_log_terms(counts_for(s, d, i, k, w), hyper.alpha[i][k], hyper.discount[k],
                                           hyper.concentration[k], ctx.beta_sum(), ctx.stirling().for_topic(k));
        any_forced = any_forced || terms.forced;
        double* slot = &out.log_weights[k * stride];
        Choice* choice = &out.choices[k * stride];
        slot[0] = terms.join;
        choice[0] = {static_cast<std::uint32_t>(k), false, w};
        for (std::size_t j = 0; j < row.size(); ++j) {
            const WordId v = row[j].column;
            slot[1 + j] = dish_log_weight(terms.open, row[j].value, hyper.beta[v], s.base_tables[s.topic_word(k, v)]);
            choice[1 + j] = {static_cast<std::uint32_t>(k), true, v};
        }
    }
    if (!any_forced) return;
    // A cell left with customers but no table has zero probability unless
    // this word reopens it; every other topic is impossible.
    for (std::size_t k = 0; k < K; ++k) {
        const auto c = s.cell(i, k, w);
        if (s.m[c] >= 1 && s.t[c] == 0) continue;
        for (std::size_t j = 0; j < stride; ++j) out.log_weights[k * stride + j] = neg_inf;
    }
}

void add_word(CountState& s, std::size_t pos, const Choice& choice, const TransformMatrix& transform) {
    const auto k = choice.topic;
    const auto i = s.group_of(pos);
    const WordId w = s.words[pos];
    if (k >= s.num_topics) throw DomainError("topic " + std::to_string(k) + " out of range");
    const auto c = s.cell(i, k, w);
    if (!choice.new_table && s.t[c] == 0)
        throw DomainError("cannot join a table in cell without tables (position " + std::to_string(pos) + ")");
    if (choice.new_table && transform.value(i, w, choice.dish) <= 0.0)
        throw DomainError("dish " + std::to_string(choice.dish) + " is outside the transform row of word " +
                          std::to_string(w));

    ++s.n[s.doc_topic(s.doc_of[pos], k)];
    ++s.m[c];
    ++s.m_sum[s.group_topic(i, k)];
    if (choice.new_table) {
        s.tables[c].push_back(choice.dish);
        ++s.t[c];
        ++s.t_sum[s.group_topic(i, k)];
        ++s.base_tables[s.topic_word(k, choice.dish)];
        ++s.topic_tables[k];
    }
    s.z[pos] = k;
    s.r[pos] = choice.new_table ? 1 : 0;
}

void resample_word(CountState& s, std::size_t pos, const SamplerContext& ctx, RngStream& rng, SweepWorkspace& work) {
    remove_word(s, pos, rng);
    compute_proposals(s, pos, ctx, work.proposals);
    const auto pick = sample_categorical(work.proposals.log_weights, rng, work.scratch);
    add_word(s, pos, work.proposals.choices[pick], ctx.transform());
}

void gibbs_sweep(CountState& s, const SamplerContext& ctx, std::uint64_t seed, std::uint64_t iteration,
                 std::span<const std::uint32_t> order) {
    SweepWorkspace work;
    for (std::size_t j = 0; j < order.size(); ++j) {
        auto rng = RngStream::keyed(seed, stream_domain::sweep, iteration, j);
        resample_word(s, order[j], ctx, rng, work);
    }
    reconcile_indicators(s);
}

void gibbs_sweep(CountState& s, const SamplerContext& ctx, std::uint64_t seed, std::uint64_t iteration) {
    const auto order = corpus_order(s);
    gibbs_sweep(s, ctx, seed, iteration, order);
}

std::vector<std::uint32_t> corpus_order(const CountState& s) {
    std::vector<std::uint32_t> order(s.num_positions());
    std::iota(order.begin(), order.end(), 0u);
    return order;
}

}  // namespace spdp
