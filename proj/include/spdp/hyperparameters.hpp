#pragma once

#include <cstddef>
#include <vector>

namespace spdp {

/// Priors of the model.
///
/// alpha[i][k]  doc-topic Dirichlet for group i
/// beta[v]      Dirichlet prior of the shared base word distribution
/// discount[k], concentration[k]  Pitman-Yor parameters of topic k
struct Hyperparameters {
    std::size_t topics = 0;
    std::vector<std::vector<double>> alpha;
    std::vector<double> beta;
    std::vector<double> discount;
    std::vector<double> concentration;

    /// Scalar priors broadcast over groups, words and topics.
    static Hyperparameters symmetric(std::size_t topics, std::size_t groups, std::size_t vocab_size,
                                     double alpha = 0.1, double beta = 0.1, double discount = 0.7,
                                     double concentration = 100.0);

    double beta_sum() const;

    /// Throws ConfigError when shapes disagree with (groups, vocab_size) or
    /// any value is out of range.
    void validate(std::size_t groups, std::size_t vocab_size) const;
};

}  // namespace spdp
