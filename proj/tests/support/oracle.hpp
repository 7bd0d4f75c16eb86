#pragma once

// Brute-force reference computations used only by the test suites. Nothing
// here calls into the sampler or the library's special functions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>
#include <vector>

namespace oracle {

/// Unsigned Stirling numbers of the first kind by counting the cycles of
/// every permutation of n elements. Returns c[k] = #permutations with k
/// cycles.
inline std::vector<std::uint64_t> cycle_counts(int n) {
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(n) + 1, 0);
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    do {
        std::vector<bool> seen(static_cast<std::size_t>(n), false);
        int cycles = 0;
        for (int s = 0; s < n; ++s) {
            if (seen[static_cast<std::size_t>(s)]) continue;
            ++cycles;
            for (int j = s; !seen[static_cast<std::size_t>(j)]; j = perm[static_cast<std::size_t>(j)])
                seen[static_cast<std::size_t>(j)] = true;
        }
        ++counts[static_cast<std::size_t>(cycles)];
    } while (std::next_permutation(perm.begin(), perm.end()));
    return counts;
}

/// Generalized Stirling numbers in linear space, straight from the
/// recursion, as a full (n+1) x (n+1) table.
inline std::vector<std::vector<long double>> stirling_linear(double a, int max_n) {
    std::vector<std::vector<long double>> s(static_cast<std::size_t>(max_n) + 1,
                                            std::vector<long double>(static_cast<std::size_t>(max_n) + 2, 0.0L));
    s[0][0] = 1.0L;
    for (int n = 0; n < max_n; ++n)
        for (int m = 0; m <= n + 1; ++m) {
            long double v = m >= 1 ? s[n][m - 1] : 0.0L;
            v += (static_cast<long double>(n) - static_cast<long double>(m) * a) * s[n][m];
            s[n + 1][m] = v;
        }
    return s;
}

/// Tiny model description, independent of the library types.
struct TinyModel {
    int groups = 1;
    int topics = 2;
    int vocab = 2;
    std::vector<std::vector<double>> alpha;  // [group][topic]
    std::vector<double> beta;                // [vocab]
    std::vector<double> discount;            // [topic]
    std::vector<double> concentration;       // [topic]
    // transform[group][w][v]; empty => identity
    std::vector<std::vector<std::vector<double>>> transform;

    double p(int g, int w, int v) const {
        if (transform.empty()) return w == v ? 1.0 : 0.0;
        return transform[static_cast<std::size_t>(g)][static_cast<std::size_t>(w)][static_cast<std::size_t>(v)];
    }
};

/// Position list: (group, document index within the global doc list, word).
struct TinyCorpus {
    std::vector<int> group_of_doc;
    std::vector<std::vector<int>> docs;
};

/// Joint log-probability computed from raw assignments by direct products.
/// `dishes` maps (group, topic, word) -> dish list (order irrelevant).
/// Returns -inf for configurations of zero probability.
inline double joint_log(const TinyModel& model, const TinyCorpus& corpus, const std::vector<int>& z,
                        const std::map<std::tuple<int, int, int>, std::vector<int>>& dishes) {
    const int K = model.topics;
    const int V = model.vocab;
    const double ninf = -std::numeric_limits<double>::infinity();

    std::map<std::tuple<int, int, int>, int> customers;
    std::vector<std::vector<int>> n(corpus.docs.size(), std::vector<int>(static_cast<std::size_t>(K), 0));
    std::size_t p = 0;
    for (std::size_t d = 0; d < corpus.docs.size(); ++d)
        for (int w : corpus.docs[d]) {
            const int k = z[p++];
            ++n[d][static_cast<std::size_t>(k)];
            ++customers[{corpus.group_of_doc[d], k, w}];
        }

    double total = 0.0;
    // Document-topic Dirichlet-multinomial.
    for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
        const auto& alpha = model.alpha[static_cast<std::size_t>(corpus.group_of_doc[d])];
        double a_sum = 0.0;
        for (int k = 0; k < K; ++k) {
            a_sum += alpha[static_cast<std::size_t>(k)];
            for (int j = 0; j < n[d][static_cast<std::size_t>(k)]; ++j)
                total += std::log(alpha[static_cast<std::size_t>(k)] + j);
        }
        for (std::size_t j = 0; j < corpus.docs[d].size(); ++j) total -= std::log(a_sum + static_cast<double>(j));
    }

    // Restaurants.
    int max_m = 1;
    for (const auto& [key, m] : customers) max_m = std::max(max_m, m);
    for (int g = 0; g < model.groups; ++g)
        for (int k = 0; k < K; ++k) {
            const double a = model.discount[static_cast<std::size_t>(k)];
            const double b = model.concentration[static_cast<std::size_t>(k)];
            const auto stir = stirling_linear(a, max_m);
            int m_tot = 0;
            int t_tot = 0;
            for (int w = 0; w < V; ++w) {
                auto mit = customers.find({g, k, w});
                const int m = mit == customers.end() ? 0 : mit->second;
                auto dit = dishes.find({g, k, w});
                const int t = dit == dishes.end() ? 0 : static_cast<int>(dit->second.size());
                if (t > m) return ninf;
                const long double s = stir[static_cast<std::size_t>(m)][static_cast<std::size_t>(t)];
                if (s <= 0.0L) return ninf;
                // Tables with a designated head: S / C(m, t).
                double binom = 1.0;
                for (int j = 1; j <= t; ++j) binom = binom * (m - t + j) / j;
                total += std::log(static_cast<double>(s)) - std::log(binom);
                m_tot += m;
                t_tot += t;
            }
            for (int j = 0; j < t_tot; ++j) total += std::log(b + j * a);
            for (int j = 0; j < m_tot; ++j) total -= std::log(b + j);
        }

    // Base measure with transform.
    double beta_sum = 0.0;
    for (double b : model.beta) beta_sum += b;
    for (int k = 0; k < K; ++k) {
        std::vector<int> q(static_cast<std::size_t>(V), 0);
        int q_tot = 0;
        for (const auto& [key, list] : dishes) {
            if (std::get<1>(key) != k) continue;
            for (int v : list) {
                const double pv = model.p(std::get<0>(key), std::get<2>(key), v);
                if (pv <= 0.0) return ninf;
                total += std::log(pv);
                ++q[static_cast<std::size_t>(v)];
                ++q_tot;
            }
        }
        for (int v = 0; v < V; ++v)
            for (int j = 0; j < q[static_cast<std::size_t>(v)]; ++j)
                total += std::log(model.beta[static_cast<std::size_t>(v)] + j);
        for (int j = 0; j < q_tot; ++j) total -= std::log(beta_sum + j);
    }
    return total;
}

/// Exact posterior over topic configurations z (encoded base K, position 0
/// least significant) by enumerating every (z, r) and, for identity
/// transforms, the dishes implied by r. Non-identity transforms enumerate
/// every ordered dish sequence.
inline std::vector<double> z_posterior(const TinyModel& model, const TinyCorpus& corpus) {
    std::size_t N = 0;
    for (const auto& d : corpus.docs) N += d.size();
    std::vector<int> word_of, group_of;
    for (std::size_t d = 0; d < corpus.docs.size(); ++d)
        for (int w : corpus.docs[d]) {
            word_of.push_back(w);
            group_of.push_back(corpus.group_of_doc[d]);
        }
    const int K = model.topics;
    std::size_t z_configs = 1;
    for (std::size_t j = 0; j < N; ++j) z_configs *= static_cast<std::size_t>(K);

    std::vector<double> log_mass(z_configs, -std::numeric_limits<double>::infinity());
    auto accumulate = [&](std::size_t zc, double lw) {
        double& acc = log_mass[zc];
        if (lw == -std::numeric_limits<double>::infinity()) return;
        if (acc == -std::numeric_limits<double>::infinity())
            acc = lw;
        else
            acc = std::max(acc, lw) + std::log1p(std::exp(-std::abs(acc - lw)));
    };

    std::vector<int> z(N);
    for (std::size_t zc = 0; zc < z_configs; ++zc) {
        std::size_t code = zc;
        for (std::size_t j = 0; j < N; ++j) {
            z[j] = static_cast<int>(code % static_cast<std::size_t>(K));
            code /= static_cast<std::size_t>(K);
        }
        for (std::size_t rc = 0; rc < (std::size_t{1} << N); ++rc) {
            // Heads per cell, in position order.
            std::map<std::tuple<int, int, int>, std::vector<int>> head_words;
            for (std::size_t j = 0; j < N; ++j)
                if (rc >> j & 1U) head_words[{group_of[j], z[j], word_of[j]}].push_back(word_of[j]);

            // Each head carries a dish drawn from its row; enumerate all.
            std::vector<std::tuple<int, int, int>> keys;
            std::vector<int> slots;  // per head: candidate dishes
            std::vector<std::vector<int>> candidates;
            for (const auto& [key, list] : head_words)
                for (std::size_t h = 0; h < list.size(); ++h) {
                    keys.push_back(key);
                    std::vector<int> cand;
                    for (int v = 0; v < model.vocab; ++v)
                        if (model.p(std::get<0>(key), std::get<2>(key), v) > 0.0) cand.push_back(v);
                    candidates.push_back(std::move(cand));
                }
            std::vector<std::size_t> idx(candidates.size(), 0);
            while (true) {
                std::map<std::tuple<int, int, int>, std::vector<int>> dishes;
                for (std::size_t h = 0; h < keys.size(); ++h) dishes[keys[h]].push_back(candidates[h][idx[h]]);
                accumulate(zc, joint_log(model, corpus, z, dishes));
                std::size_t h = 0;
                while (h < idx.size() && ++idx[h] == candidates[h].size()) idx[h++] = 0;
                if (h == idx.size()) break;
            }
        }
    }
    double top = *std::max_element(log_mass.begin(), log_mass.end());
    std::vector<double> prob(z_configs);
    double sum = 0.0;
    for (std::size_t j = 0; j < z_configs; ++j) sum += prob[j] = std::exp(log_mass[j] - top);
    for (double& x : prob) x /= sum;
    return prob;
}

}  // namespace oracle
