#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "spdp/corpus.hpp"
#include "spdp/hyperparameters.hpp"
#include "spdp/transform.hpp"

namespace fixtures {

/// Corpus over vocabulary "w0".."w{V-1}" from raw ids; groups named g0, g1, ...
inline spdp::Corpus make_corpus(const std::vector<std::vector<std::vector<int>>>& groups, std::size_t vocab) {
    auto v = std::make_shared<spdp::Vocabulary>();
    for (std::size_t w = 0; w < vocab; ++w) v->intern("w" + std::to_string(w));
    spdp::Corpus c;
    c.vocabulary = v;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        spdp::Group group{"g" + std::to_string(g), {}};
        for (const auto& doc : groups[g]) {
            spdp::Document d;
            for (int w : doc) d.push_back(static_cast<spdp::WordId>(w));
            group.documents.push_back(std::move(d));
        }
        c.groups.push_back(std::move(group));
    }
    return c;
}

/// Same corpus in the oracle's flat representation.
inline oracle::TinyCorpus to_oracle(const std::vector<std::vector<std::vector<int>>>& groups) {
    oracle::TinyCorpus t;
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (const auto& doc : groups[g]) {
            t.group_of_doc.push_back(static_cast<int>(g));
            t.docs.push_back(doc);
        }
    return t;
}

inline oracle::TinyModel to_oracle(const spdp::Hyperparameters& h, std::size_t groups, std::size_t vocab) {
    oracle::TinyModel m;
    m.groups = static_cast<int>(groups);
    m.topics = static_cast<int>(h.topics);
    m.vocab = static_cast<int>(vocab);
    m.alpha = h.alpha;
    m.beta = h.beta;
    m.discount = h.discount;
    m.concentration = h.concentration;
    return m;
}

/// Dense copy of a transform for the oracle.
inline void copy_transform(const spdp::TransformMatrix& p, oracle::TinyModel& m) {
    if (p.is_identity()) return;
    m.transform.assign(static_cast<std::size_t>(m.groups),
                       std::vector<std::vector<double>>(static_cast<std::size_t>(m.vocab),
                                                        std::vector<double>(static_cast<std::size_t>(m.vocab), 0.0)));
    for (int g = 0; g < m.groups; ++g)
        for (int w = 0; w < m.vocab; ++w)
            for (const auto& e : p.row(static_cast<std::size_t>(g), static_cast<spdp::WordId>(w)))
                m.transform[static_cast<std::size_t>(g)][static_cast<std::size_t>(w)][e.column] = e.value;
}

/// Random hyperparameters with per-group/per-topic variation.
inline spdp::Hyperparameters random_hyper(std::size_t K, std::size_t I, std::size_t V, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> alpha(0.1, 2.0), beta(0.1, 2.0), disc(0.0, 0.9), conc(0.5, 10.0);
    spdp::Hyperparameters h = spdp::Hyperparameters::symmetric(K, I, V, 0.1, 0.1, 0.5, 1.0);
    for (auto& row : h.alpha)
        for (auto& a : row) a = alpha(gen);
    for (auto& b : h.beta) b = beta(gen);
    for (auto& a : h.discount) a = disc(gen);
    for (auto& b : h.concentration) b = conc(gen);
    return h;
}

/// Doubly stochastic transform mixing the identity with a cyclic shift per
/// group: P = (1 - s) I + s Shift.
inline spdp::TransformMatrix shifted_transform(std::size_t I, std::size_t V, double s) {
    std::vector<spdp::TransformTriplet> trip;
    for (std::size_t g = 0; g < I; ++g)
        for (std::size_t w = 0; w < V; ++w) {
            trip.push_back({g, static_cast<spdp::WordId>(w), static_cast<spdp::WordId>(w), 1.0 - s});
            trip.push_back({g, static_cast<spdp::WordId>(w), static_cast<spdp::WordId>((w + 1 + g) % V), s});
        }
    return spdp::TransformMatrix::from_triplets(I, V, trip);
}

}  // namespace fixtures
