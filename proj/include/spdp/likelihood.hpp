#pragma once

#include "spdp/count_state.hpp"
#include "spdp/hyperparameters.hpp"
#include "spdp/numerics.hpp"
#include "spdp/transform.hpp"

namespace spdp {

/// log p(W, Z, V, R | hyperparameters, P) of the collapsed model:
///
///   sum_{i,w,v} q_{ikwv} log p^i_{wv}
/// + sum_{i,d} [log B_K(alpha_i + n_{id.}) - log B_K(alpha_i)]
/// + sum_{i,k} [log (b_k|a_k)_{t_{ik.}} - log (b_k)_{m_{ik.}}]
/// + sum_k [log B_V(beta + Q_{k.}) - log B_V(beta)]
/// + sum_{i,k,w} [log S^{m_{ikw}}_{t_{ikw}, a_k} - log C(m_{ikw}, t_{ikw})]
///
/// where B is the multivariate Beta function. Throws IntegrityError when the
/// counts are inconsistent (table indicators are not checked).
double joint_log_prob(const CountState& state, const Hyperparameters& hyper, const TransformMatrix& transform);

/// Same, with a caller-provided Stirling cache that covers every m.
double joint_log_prob(const CountState& state, const Hyperparameters& hyper, const TransformMatrix& transform,
                      const StirlingCache& stirling);

/// log of the multivariate Beta function prod Gamma(x_j) / Gamma(sum x_j).
double log_multivariate_beta(std::span<const double> x);

}  // namespace spdp
