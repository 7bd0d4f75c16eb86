#pragma once

// Reusable randomized checks shared by unit and acceptance tests.

#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <tuple>
#include <vector>

#include "fixtures.hpp"
#include "oracle.hpp"
#include "spdp/count_state.hpp"
#include "spdp/errors.hpp"
#include "spdp/likelihood.hpp"
#include "spdp/sampler.hpp"

namespace checks {

/// A small random corpus, priors and transform together with a sampled
/// state on it.
struct TinyCase {
    std::vector<std::vector<std::vector<int>>> raw;
    spdp::Corpus corpus;
    spdp::Hyperparameters hyper;
    spdp::TransformMatrix transform;
    spdp::CountState state;
};

inline TinyCase random_tiny_case(std::mt19937_64& gen, bool allow_transform) {
    TinyCase c;
    const std::size_t I = 1 + gen() % 2;
    const std::size_t V = 2 + gen() % 3;
    const std::size_t K = 2 + gen() % 2;
    c.raw.resize(I);
    for (auto& group : c.raw) {
        const std::size_t docs = 1 + gen() % 3;
        for (std::size_t d = 0; d < docs; ++d) {
            std::vector<int> doc(1 + gen() % 4);
            // Small effective vocabulary per doc so cells hold several customers.
            for (int& w : doc) w = static_cast<int>(gen() % V);
            group.push_back(doc);
        }
    }
    c.corpus = fixtures::make_corpus(c.raw, V);
    c.hyper = fixtures::random_hyper(K, I, V, gen);
    c.transform = allow_transform && gen() % 2 == 0 ? fixtures::shifted_transform(I, V, 0.2 + 0.5 * ((gen() % 100) / 100.0))
                                                    : spdp::TransformMatrix::identity(I, V);
    c.state = spdp::init_state(c.corpus, c.hyper, c.transform, gen());
    spdp::StirlingCache cache(c.hyper.discount, spdp::required_stirling_size(c.state));
    spdp::SamplerContext ctx(c.hyper, c.transform, cache);
    const int sweeps = static_cast<int>(gen() % 4);
    for (int s = 0; s < sweeps; ++s) spdp::gibbs_sweep(c.state, ctx, gen(), static_cast<std::uint64_t>(s));
    return c;
}

/// Dish lists of a state keyed the way the oracle expects.
inline std::map<std::tuple<int, int, int>, std::vector<int>> oracle_dishes(const spdp::CountState& s) {
    std::map<std::tuple<int, int, int>, std::vector<int>> out;
    const std::size_t V = s.vocab_size;
    const std::size_t K = s.num_topics;
    for (const auto& [cell, list] : s.tables) {
        auto& dst = out[{static_cast<int>(cell / (V * K)), static_cast<int>((cell / V) % K), static_cast<int>(cell % V)}];
        for (auto v : list) dst.push_back(static_cast<int>(v));
    }
    return out;
}

inline std::vector<int> oracle_z(const spdp::CountState& s) { return {s.z.begin(), s.z.end()}; }

struct RatioResult {
    double max_error = 0.0;       // worst |Δ log-weight − Δ joint|
    int compared = 0;             // finite pairs compared
    int support_mismatches = 0;   // weight finite xor completed state valid
};

/// Removes the word at `pos` and compares every proposal weight against the
/// joint of the state completed with that choice, relative to the first
/// finite choice.
inline RatioResult check_proposal_ratios(const TinyCase& c, std::size_t pos, spdp::RngStream& rng) {
    RatioResult res;
    spdp::CountState rest = c.state;
    spdp::remove_word(rest, pos, rng);
    spdp::StirlingCache cache(c.hyper.discount, spdp::required_stirling_size(c.state) + 2);
    spdp::SamplerContext ctx(c.hyper, c.transform, cache);
    spdp::Proposals props;
    spdp::compute_proposals(rest, pos, ctx, props);

    double ref_weight = 0.0;
    double ref_joint = 0.0;
    bool have_ref = false;
    for (std::size_t j = 0; j < props.choices.size(); ++j) {
        spdp::CountState done = rest;
        bool valid = true;
        try {
            spdp::add_word(done, pos, props.choices[j], c.transform);
            valid = spdp::consistency_violations(done, &c.transform, {.check_indicators = false}).empty();
        } catch (const spdp::DomainError&) {
            valid = false;
        }
        const double w = props.log_weights[j];
        if (valid != std::isfinite(w)) {
            ++res.support_mismatches;
            continue;
        }
        if (!valid) continue;
        const double joint = spdp::joint_log_prob(done, c.hyper, c.transform);
        if (!have_ref) {
            ref_weight = w;
            ref_joint = joint;
            have_ref = true;
            continue;
        }
        res.max_error = std::max(res.max_error, std::abs((w - ref_weight) - (joint - ref_joint)));
        ++res.compared;
    }
    if (!have_ref) ++res.support_mismatches;
    return res;
}

}  // namespace checks
