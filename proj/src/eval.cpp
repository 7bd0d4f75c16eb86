#include "spdp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "spdp/errors.hpp"
#include "spdp/numerics.hpp"
#include "spdp/text_io.hpp"

namespace spdp {

std::vector<double> fold_in(const Document& doc, std::size_t group, const ModelEstimate& est,
                            const Hyperparameters& hyper, unsigned iterations, RngStream& rng) {
    const std::size_t K = est.topics;
    const auto& alpha = hyper.alpha.at(group);
    const double alpha_sum = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    std::vector<double> counts(K, 0.0);

    if (iterations > 0 && !doc.empty()) {
        std::vector<std::uint32_t> z(doc.size());
        std::vector<double> logw(K);
        std::vector<double> scratch;
        auto draw = [&](WordId w) {
            for (std::size_t k = 0; k < K; ++k)
                logw[k] = std::log(counts[k] + alpha[k]) + std::log(est.phi_group_at(group, k, w));
            return static_cast<std::uint32_t>(sample_categorical(logw, rng, scratch));
        };
        for (std::size_t l = 0; l < doc.size(); ++l) {
            z[l] = draw(doc[l]);
            counts[z[l]] += 1.0;
        }
        for (unsigned it = 1; it < iterations; ++it)
            for (std::size_t l = 0; l < doc.size(); ++l) {
                counts[z[l]] -= 1.0;
                z[l] = draw(doc[l]);
                counts[z[l]] += 1.0;
            }
    }

    const double total = static_cast<double>(iterations > 0 ? doc.size() : 0) + alpha_sum;
    std::vector<double> theta(K);
    for (std::size_t k = 0; k < K; ++k) theta[k] = (counts[k] + alpha[k]) / total;
    return theta;
}

std::vector<double> fold_in_corpus(const Corpus& test, const ModelEstimate& est, const Hyperparameters& hyper,
                                   unsigned iterations, std::uint64_t seed) {
    std::vector<double> theta;
    theta.reserve(test.num_documents() * est.topics);
    std::size_t d = 0;
    for (std::size_t i = 0; i < test.groups.size(); ++i)
        for (const auto& doc : test.groups[i].documents) {
            auto rng = RngStream::keyed(seed, stream_domain::fold_in, d++);
            auto row = fold_in(doc, i, est, hyper, iterations, rng);
            theta.insert(theta.end(), row.begin(), row.end());
        }
    return theta;
}

PerplexityReport perplexity(const Corpus& test, const ModelEstimate& est, std::span<const double> theta) {
    const std::size_t K = est.topics;
    if (test.num_groups() != est.groups)
        throw ConfigError("test corpus has " + std::to_string(test.num_groups()) + " groups, model has " +
                          std::to_string(est.groups));
    if (theta.size() != test.num_documents() * K) throw ConfigError("theta does not match the test corpus");

    PerplexityReport rep;
    double total_log = 0.0;
    std::size_t d = 0;
    for (std::size_t i = 0; i < test.groups.size(); ++i) {
        double group_log = 0.0;
        std::size_t group_tokens = 0;
        for (const auto& doc : test.groups[i].documents) {
            const double* th = theta.data() + d * K;
            for (WordId w : doc) {
                if (w >= est.vocab_size)
                    throw DomainError("test word id " + std::to_string(w) + " is outside the model vocabulary");
                double p = 0.0;
                for (std::size_t k = 0; k < K; ++k) p += est.phi_group_at(i, k, w) * th[k];
                group_log += std::log(p);
            }
            group_tokens += doc.size();
            ++d;
        }
        total_log += group_log;
        rep.tokens += group_tokens;
        rep.group_names.push_back(test.groups[i].name);
        rep.per_group.push_back(group_tokens ? std::exp(-group_log / static_cast<double>(group_tokens))
                                             : std::numeric_limits<double>::quiet_NaN());
    }
    rep.overall = rep.tokens ? std::exp(-total_log / static_cast<double>(rep.tokens))
                             : std::numeric_limits<double>::quiet_NaN();
    return rep;
}

PerplexityReport evaluate_heldout(const Corpus& test, const ModelEstimate& est, const Hyperparameters& hyper,
                                  unsigned fold_in_iterations, std::uint64_t seed) {
    const auto theta = fold_in_corpus(test, est, hyper, fold_in_iterations, seed);
    return perplexity(test, est, theta);
}

double hellinger(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size())
        throw ConfigError("hellinger: lengths differ (" + std::to_string(p.size()) + " vs " +
                          std::to_string(q.size()) + ")");
    double bc = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) bc += std::sqrt(p[j] * q[j]);
    return std::sqrt(std::clamp(1.0 - bc, 0.0, 1.0));
}

double TopicAlignment::matched_sum() const {
    double sum = 0.0;
    for (std::size_t k = 0; k < topics; ++k) sum += distance(k, permutation[k]);
    return sum;
}

TopicAlignment align_rows(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
    if (a.size() != b.size())
        throw ConfigError("cannot align " + std::to_string(a.size()) + " topics with " + std::to_string(b.size()));
    const std::size_t K = a.size();
    TopicAlignment al;
    al.topics = K;
    al.distances.resize(K * K);
    for (std::size_t x = 0; x < K; ++x)
        for (std::size_t y = 0; y < K; ++y) al.distances[x * K + y] = hellinger(a[x], b[y]);

    // Greedy: repeatedly take the closest unmatched pair.
    std::vector<std::size_t> pairs(K * K);
    std::iota(pairs.begin(), pairs.end(), std::size_t{0});
    std::stable_sort(pairs.begin(), pairs.end(),
                     [&](std::size_t l, std::size_t r) { return al.distances[l] < al.distances[r]; });
    al.permutation.assign(K, K);
    std::vector<bool> used(K, false);
    for (std::size_t idx : pairs) {
        const std::size_t x = idx / K, y = idx % K;
        if (al.permutation[x] != K || used[y]) continue;
        al.permutation[x] = y;
        used[y] = true;
    }

    // Pairwise swaps until no swap lowers the matched sum.
    for (bool improved = true; improved;) {
        improved = false;
        for (std::size_t x = 0; x < K; ++x)
            for (std::size_t y = x + 1; y < K; ++y) {
                const double now = al.distance(x, al.permutation[x]) + al.distance(y, al.permutation[y]);
                const double swapped = al.distance(x, al.permutation[y]) + al.distance(y, al.permutation[x]);
                if (swapped < now - 1e-15) {
                    std::swap(al.permutation[x], al.permutation[y]);
                    improved = true;
                }
            }
    }

    double identity_sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) identity_sum += al.distance(k, k);
    if (identity_sum < al.matched_sum()) std::iota(al.permutation.begin(), al.permutation.end(), std::size_t{0});
    return al;
}

TopicAlignment align_and_heatmap(const ModelEstimate& a, const ModelEstimate& b) {
    if (a.topics != b.topics || a.vocab_size != b.vocab_size)
        throw ConfigError("cannot compare models with K=" + std::to_string(a.topics) + ", V=" +
                          std::to_string(a.vocab_size) + " and K=" + std::to_string(b.topics) +
                          ", V=" + std::to_string(b.vocab_size));
    auto rows = [](const ModelEstimate& e) {
        std::vector<std::vector<double>> out;
        for (std::size_t k = 0; k < e.topics; ++k) out.emplace_back(e.phi0_row(k).begin(), e.phi0_row(k).end());
        return out;
    };
    return align_rows(rows(a), rows(b));
}

std::string heatmap_text(const TopicAlignment& al) {
    std::string out = std::to_string(al.topics) + "\n";
    std::vector<double> row(al.topics);
    for (std::size_t x = 0; x < al.topics; ++x) {
        for (std::size_t j = 0; j < al.topics; ++j) row[j] = al.distance(x, al.permutation[j]);
        out += text::join_doubles(row) + "\n";
    }
    return out;
}

void write_heatmap(const TopicAlignment& al, const std::filesystem::path& path) {
    std::ofstream out(path);
    out << heatmap_text(al);
    if (!out) throw LoadError("cannot write heatmap to '" + path.string() + "'");
}

std::vector<TopWord> top_words(const ModelEstimate& est, std::size_t group, std::size_t topic, std::size_t n) {
    const auto row = est.phi_group_row(group, topic);
    std::vector<WordId> ids(row.size());
    std::iota(ids.begin(), ids.end(), WordId{0});
    n = std::min(n, ids.size());
    std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end(), [&](WordId l, WordId r) {
        return row[l] != row[r] ? row[l] > row[r] : l < r;
    });
    std::vector<TopWord> out;
    for (std::size_t j = 0; j < n; ++j) out.push_back({ids[j], row[ids[j]]});
    return out;
}

std::vector<TopicSummary> topic_table(const ModelEstimate& est, std::size_t n) {
    std::vector<TopicSummary> out;
    for (std::size_t i = 0; i < est.groups; ++i) {
        std::vector<std::size_t> order(est.topics);
        std::iota(order.begin(), order.end(), std::size_t{0});
        const double* weight = est.topic_weight.data() + i * est.topics;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return weight[l] > weight[r]; });
        for (std::size_t rank = 0; rank < order.size(); ++rank) {
            const auto k = order[rank];
            out.push_back({i, k, weight[k], rank + 1, top_words(est, i, k, n)});
        }
    }
    return out;
}

}  // namespace spdp
