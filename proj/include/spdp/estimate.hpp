#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "spdp/count_state.hpp"
#include "spdp/hyperparameters.hpp"
#include "spdp/transform.hpp"

namespace spdp {

/// Posterior point estimates read off one sampler state.
///
/// theta[d * K + k]            doc-topic proportions of training document d
/// phi0[k * V + v]             shared base word distribution of topic k
/// phi_group[(i * K + k) * V + w]  group-specific word distribution
/// topic_weight[i * K + k]     length-weighted mean of theta over group i
struct ModelEstimate {
    std::size_t groups = 0;
    std::size_t topics = 0;
    std::size_t vocab_size = 0;
    std::vector<double> theta;
    std::vector<double> phi0;
    std::vector<double> phi_group;
    std::vector<double> topic_weight;

    std::span<const double> theta_row(std::size_t doc) const { return {theta.data() + doc * topics, topics}; }
    std::span<const double> phi0_row(std::size_t k) const { return {phi0.data() + k * vocab_size, vocab_size}; }
    std::span<const double> phi_group_row(std::size_t group, std::size_t k) const {
        return {phi_group.data() + (group * topics + k) * vocab_size, vocab_size};
    }
    double phi_group_at(std::size_t group, std::size_t k, WordId w) const {
        return phi_group[(group * topics + k) * vocab_size + w];
    }
};

/// theta_{idk} = (n_{idk} + alpha_{ik}) / sum_k (n_{idk} + alpha_{ik})
/// phi0_{kv}   = (beta_v + Q_{kv}) / (sum_v beta_v + T_k)
/// phi^i_{kw}  = (m_{ikw} - a_k t_{ikw}) / (b_k + m_{ik.})
///             + (b_k + a_k t_{ik.}) / (b_k + m_{ik.}) * (P^i phi0_k)_w
ModelEstimate estimate(const CountState& state, const Hyperparameters& hyper, const TransformMatrix& transform);

/// Plain-text dump: a header line, then TOPIC_WEIGHT, PHI0, PHI_GROUP and
/// THETA sections with one row per line.
void write_estimate(const ModelEstimate& est, const std::filesystem::path& path);

}  // namespace spdp
