#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "spdp/corpus.hpp"

namespace synthetic {

struct Settings {
    std::size_t groups = 2;
    std::size_t docs_per_group = 500;
    std::size_t min_length = 80;
    std::size_t max_length = 120;
    std::size_t topics = 8;
    std::size_t vocab = 400;
    double block_mass = 0.9;    // share of a topic's mass on its own word block
    double doc_alpha = 0.3;     // Dirichlet concentration of document mixtures
    std::uint64_t seed = 1;
};

struct Mixture {
    spdp::Corpus corpus;
    std::vector<std::vector<double>> topics;  // planted word distributions
};

inline std::vector<double> dirichlet(std::size_t n, double a, std::mt19937_64& gen) {
    std::gamma_distribution<double> gamma(a, 1.0);
    std::vector<double> x(n);
    double sum = 0.0;
    for (double& v : x) sum += v = gamma(gen) + 1e-300;
    for (double& v : x) v /= sum;
    return x;
}

/// Documents drawn from a known mixture: topic k puts `block_mass` of its
/// mass on the k-th block of V/K words (Zipf-like within the block) and the
/// rest uniformly over the whole vocabulary.
inline Mixture make(const Settings& settings) {
    std::mt19937_64 gen(settings.seed);
    Mixture mix;
    const std::size_t block = settings.vocab / settings.topics;
    for (std::size_t k = 0; k < settings.topics; ++k) {
        std::vector<double> phi(settings.vocab, (1.0 - settings.block_mass) / static_cast<double>(settings.vocab));
        double zipf_sum = 0.0;
        for (std::size_t j = 0; j < block; ++j) zipf_sum += 1.0 / static_cast<double>(j + 1);
        for (std::size_t j = 0; j < block; ++j) phi[k * block + j] += settings.block_mass / static_cast<double>(j + 1) / zipf_sum;
        mix.topics.push_back(std::move(phi));
    }

    std::vector<std::discrete_distribution<int>> word_of_topic;
    for (const auto& phi : mix.topics) word_of_topic.emplace_back(phi.begin(), phi.end());
    std::uniform_int_distribution<std::size_t> length(settings.min_length, settings.max_length);

    std::vector<std::vector<std::vector<int>>> raw(settings.groups);
    for (auto& group : raw)
        for (std::size_t d = 0; d < settings.docs_per_group; ++d) {
            auto theta = dirichlet(settings.topics, settings.doc_alpha, gen);
            std::discrete_distribution<int> pick(theta.begin(), theta.end());
            std::vector<int> doc(length(gen));
            for (int& w : doc) w = word_of_topic[static_cast<std::size_t>(pick(gen))](gen);
            group.push_back(std::move(doc));
        }
    mix.corpus = fixtures::make_corpus(raw, settings.vocab);
    return mix;
}

}  // namespace synthetic
