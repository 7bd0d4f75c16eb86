#include "spdp/hyperparameters.hpp"

#include <numeric>
#include <string>

#include "spdp/errors.hpp"

namespace spdp {

Hyperparameters Hyperparameters::symmetric(std::size_t topics, std::size_t groups, std::size_t vocab_size,
                                           double alpha, double beta, double discount, double concentration) {
    Hyperparameters h;
    h.topics = topics;
    h.alpha.assign(groups, std::vector<double>(topics, alpha));
    h.beta.assign(vocab_size, beta);
    h.discount.assign(topics, discount);
    h.concentration.assign(topics, concentration);
    return h;
}

double Hyperparameters::beta_sum() const { return std::accumulate(beta.begin(), beta.end(), 0.0); }

void Hyperparameters::validate(std::size_t groups, std::size_t vocab_size) const {
    if (topics == 0) throw ConfigError("number of topics must be positive");
    if (alpha.size() != groups)
        throw ConfigError("alpha has " + std::to_string(alpha.size()) + " groups, corpus has " +
                          std::to_string(groups));
    for (const auto& row : alpha) {
        if (row.size() != topics) throw ConfigError("alpha row length differs from topic count");
        for (double x : row)
            if (!(x > 0.0)) throw ConfigError("alpha entries must be positive");
    }
    if (beta.size() != vocab_size)
        throw ConfigError("beta has " + std::to_string(beta.size()) + " entries, vocabulary has " +
                          std::to_string(vocab_size));
    for (double x : beta)
        if (!(x > 0.0)) throw ConfigError("beta entries must be positive");
    if (discount.size() != topics || concentration.size() != topics)
        throw ConfigError("discount/concentration length differs from topic count");
    for (std::size_t k = 0; k < topics; ++k) {
        if (!(discount[k] >= 0.0 && discount[k] < 1.0))
            throw ConfigError("discount must lie in [0, 1), got " + std::to_string(discount[k]));
        if (!(concentration[k] > 0.0))
            throw ConfigError("concentration must be positive, got " + std::to_string(concentration[k]));
    }
}

}  // namespace spdp
