#include "spdp/estimate.hpp"

#include <fstream>

#include "spdp/errors.hpp"
#include "spdp/text_io.hpp"

namespace spdp {

ModelEstimate estimate(const CountState& s, const Hyperparameters& hyper, const TransformMatrix& transform) {
    const std::size_t I = s.num_groups;
    const std::size_t K = s.num_topics;
    const std::size_t V = s.vocab_size;
    ModelEstimate est;
    est.groups = I;
    est.topics = K;
    est.vocab_size = V;

    est.theta.resize(s.num_documents() * K);
    est.topic_weight.assign(I * K, 0.0);
    std::vector<double> group_length(I, 0.0);
    for (std::size_t d = 0; d < s.num_documents(); ++d) {
        const auto i = s.group_of_doc[d];
        double total = 0.0;
        for (std::size_t k = 0; k < K; ++k) total += s.n[s.doc_topic(d, k)] + hyper.alpha[i][k];
        const double len = static_cast<double>(s.doc_length(d));
        for (std::size_t k = 0; k < K; ++k) {
            const double th = (s.n[s.doc_topic(d, k)] + hyper.alpha[i][k]) / total;
            est.theta[d * K + k] = th;
            est.topic_weight[i * K + k] += len * th;
        }
        group_length[i] += len;
    }
    for (std::size_t i = 0; i < I; ++i)
        for (std::size_t k = 0; k < K; ++k)
            est.topic_weight[i * K + k] = group_length[i] > 0 ? est.topic_weight[i * K + k] / group_length[i]
                                                              : 1.0 / static_cast<double>(K);

    const double beta_sum = hyper.beta_sum();
    est.phi0.resize(K * V);
    for (std::size_t k = 0; k < K; ++k) {
        const double denom = beta_sum + s.topic_tables[k];
        for (std::size_t v = 0; v < V; ++v)
            est.phi0[k * V + v] = (hyper.beta[v] + s.base_tables[s.topic_word(k, static_cast<WordId>(v))]) / denom;
    }

    est.phi_group.resize(I * K * V);
    for (std::size_t i = 0; i < I; ++i)
        for (std::size_t k = 0; k < K; ++k) {
            const double a = hyper.discount[k];
            const double b = hyper.concentration[k];
            const auto gk = s.group_topic(i, k);
            const double denom = b + s.m_sum[gk];
            const double base_weight = (b + a * s.t_sum[gk]) / denom;
            for (std::size_t w = 0; w < V; ++w) {
                const auto c = s.cell(i, k, static_cast<WordId>(w));
                double base = 0.0;
                for (const auto& e : transform.row(i, static_cast<WordId>(w))) base += e.value * est.phi0[k * V + e.column];
                est.phi_group[c] = (s.m[c] - a * s.t[c]) / denom + base_weight * base;
            }
        }
    return est;
}

void write_estimate(const ModelEstimate& est, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw LoadError("cannot write estimate to '" + path.string() + "'");
    const std::size_t K = est.topics;
    const std::size_t V = est.vocab_size;
    out << "SPDP-ESTIMATE 1\n";
    out << "groups " << est.groups << "\ntopics " << K << "\nvocab " << V << "\n";
    out << "TOPIC_WEIGHT\n";
    for (std::size_t i = 0; i < est.groups; ++i)
        out << text::join_doubles(std::span<const double>(est.topic_weight.data() + i * K, K)) << '\n';
    out << "PHI0\n";
    for (std::size_t k = 0; k < K; ++k) out << text::join_doubles(est.phi0_row(k)) << '\n';
    out << "PHI_GROUP\n";
    for (std::size_t i = 0; i < est.groups; ++i)
        for (std::size_t k = 0; k < K; ++k) out << text::join_doubles(est.phi_group_row(i, k)) << '\n';
    out << "THETA\n";
    for (std::size_t d = 0; K > 0 && d < est.theta.size() / K; ++d) out << text::join_doubles(est.theta_row(d)) << '\n';
    if (!out) throw LoadError("write failed for '" + path.string() + "'");
}

}  // namespace spdp
