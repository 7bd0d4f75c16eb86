#include "spdp/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace spdp {

double log_multivariate_beta(std::span<const double> x) {
    double sum = 0.0;
    double log_gammas = 0.0;
    for (double v : x) {
        sum += v;
        log_gammas += std::lgamma(v);
    }
    return log_gammas - std::lgamma(sum);
}

double joint_log_prob(const CountState& s, const Hyperparameters& hyper, const TransformMatrix& transform) {
    std::int32_t largest = 0;
    for (auto v : s.m) largest = std::max(largest, v);
    StirlingCache stirling(hyper.discount, static_cast<std::size_t>(largest) + 1);
    return joint_log_prob(s, hyper, transform, stirling);
}

double joint_log_prob(const CountState& s, const Hyperparameters& hyper, const TransformMatrix& transform,
                      const StirlingCache& stirling) {
    require_consistent(s, &transform, {.check_indicators = false});
    const std::size_t K = s.num_topics;
    const std::size_t V = s.vocab_size;
    double total = 0.0;

    for (const auto& [c, dishes] : s.tables) {
        const std::size_t w = c % V;
        const std::size_t i = c / (V * K);
        for (WordId v : dishes) total += std::log(transform.value(i, static_cast<WordId>(w), v));
    }

    std::vector<double> buf(K);
    for (std::size_t d = 0; d < s.num_documents(); ++d) {
        const auto& alpha = hyper.alpha[s.group_of_doc[d]];
        for (std::size_t k = 0; k < K; ++k) buf[k] = alpha[k] + s.n[s.doc_topic(d, k)];
        total += log_multivariate_beta(buf) - log_multivariate_beta(alpha);
    }

    for (std::size_t i = 0; i < s.num_groups; ++i)
        for (std::size_t k = 0; k < K; ++k) {
            const auto gk = s.group_topic(i, k);
            total += pochhammer_log(hyper.concentration[k], hyper.discount[k], static_cast<std::size_t>(s.t_sum[gk]));
            total -= pochhammer_log(hyper.concentration[k], 1.0, static_cast<std::size_t>(s.m_sum[gk]));
        }

    std::vector<double> post(V);
    const double prior = log_multivariate_beta(hyper.beta);
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t v = 0; v < V; ++v) post[v] = hyper.beta[v] + s.base_tables[s.topic_word(k, static_cast<WordId>(v))];
        total += log_multivariate_beta(post) - prior;
    }

    for (std::size_t c = 0; c < s.num_cells(); ++c) {
        if (s.m[c] == 0) continue;
        const std::size_t k = (c / V) % K;
        const double m = s.m[c];
        const double t = s.t[c];
        const double log_binom = std::lgamma(m + 1.0) - std::lgamma(t + 1.0) - std::lgamma(m - t + 1.0);
        total += stirling.for_topic(k).log(static_cast<std::size_t>(s.m[c]), static_cast<std::size_t>(s.t[c])) -
                 log_binom;
    }
    return total;
}

}  // namespace spdp
