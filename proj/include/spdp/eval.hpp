#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "spdp/corpus.hpp"
#include "spdp/estimate.hpp"
#include "spdp/hyperparameters.hpp"
#include "spdp/rng.hpp"

namespace spdp {

struct PerplexityReport {
    double overall = 0.0;
    std::vector<double> per_group;  // NaN for groups without held-out tokens
    std::vector<std::string> group_names;
    std::size_t tokens = 0;
};

/// Topic proportions of one unseen document: Gibbs sampling of its topic
/// assignments only, with the group's word distributions frozen, then the
/// posterior mean (n_k + alpha_k) / (L + sum alpha). Zero iterations give
/// the prior mean.
std::vector<double> fold_in(const Document& doc, std::size_t group, const ModelEstimate& est,
                            const Hyperparameters& hyper, unsigned iterations, RngStream& rng);

/// fold_in for every document of `test`; row-major (document, topic), with
/// document d drawing from the stream keyed (seed, d).
std::vector<double> fold_in_corpus(const Corpus& test, const ModelEstimate& est, const Hyperparameters& hyper,
                                   unsigned iterations, std::uint64_t seed);

/// exp(-sum_tokens log sum_k phi^i_{k,w} theta_{d,k} / tokens), overall and
/// per group. `theta` holds one row per test document.
PerplexityReport perplexity(const Corpus& test, const ModelEstimate& est, std::span<const double> theta);

/// Fold-in followed by perplexity.
PerplexityReport evaluate_heldout(const Corpus& test, const ModelEstimate& est, const Hyperparameters& hyper,
                                  unsigned fold_in_iterations, std::uint64_t seed);

/// sqrt(1 - sum_v sqrt(p_v q_v)), clamped into [0, 1].
double hellinger(std::span<const double> p, std::span<const double> q);

/// Matching of topics of model B to topics of model A.
///
/// permutation[k]   topic of B matched to topic k of A
/// distances        K x K Hellinger matrix, distances[a * K + b]
struct TopicAlignment {
    std::size_t topics = 0;
    std::vector<std::size_t> permutation;
    std::vector<double> distances;

    double distance(std::size_t a, std::size_t b) const { return distances[a * topics + b]; }
    double matched_sum() const;
    double matched_mean() const { return topics ? matched_sum() / static_cast<double>(topics) : 0.0; }
};

/// Aligns two sets of K distributions over the same support: greedy
/// smallest-distance matching refined by pairwise swaps, never worse than
/// the identity matching.
TopicAlignment align_rows(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b);

/// align_rows on the shared base distributions phi0 of two estimates.
TopicAlignment align_and_heatmap(const ModelEstimate& a, const ModelEstimate& b);

/// Plain-text heatmap: "K", then K rows of K distances with B's topics
/// reordered by the permutation, so matched pairs lie on the diagonal.
std::string heatmap_text(const TopicAlignment& alignment);
void write_heatmap(const TopicAlignment& alignment, const std::filesystem::path& path);

struct TopWord {
    WordId word;
    double probability;
};

/// The n most probable words of phi^i_k, ties broken by ascending word id.
std::vector<TopWord> top_words(const ModelEstimate& est, std::size_t group, std::size_t topic, std::size_t n);

struct TopicSummary {
    std::size_t group = 0;
    std::size_t topic = 0;
    double probability = 0.0;  // topic weight within the group
    std::size_t rank = 0;      // 1 = most probable topic of the group
    std::vector<TopWord> words;
};

/// Every (group, topic) with its weight, rank and top words; groups in
/// order, topics by rank within each group.
std::vector<TopicSummary> topic_table(const ModelEstimate& est, std::size_t n);

}  // namespace spdp
