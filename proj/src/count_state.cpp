#include "spdp/count_state.hpp"

#include <algorithm>
#include <sstream>

#include "spdp/errors.hpp"
#include "spdp/transform.hpp"

namespace spdp {

CountState::CountState(const Corpus& corpus, std::size_t topics)
    : num_groups(corpus.num_groups()), num_topics(topics), vocab_size(corpus.vocab_size()) {
    const std::size_t positions = corpus.token_count();
    words.reserve(positions);
    doc_of.reserve(positions);
    doc_begin.push_back(0);
    for (std::size_t g = 0; g < corpus.groups.size(); ++g) {
        for (const auto& doc : corpus.groups[g].documents) {
            const auto d = static_cast<std::uint32_t>(group_of_doc.size());
            for (WordId w : doc) {
                words.push_back(w);
                doc_of.push_back(d);
            }
            group_of_doc.push_back(static_cast<std::uint32_t>(g));
            doc_begin.push_back(words.size());
        }
    }
    z.assign(positions, 0);
    r.assign(positions, 0);
    n.assign(num_documents() * num_topics, 0);
    m.assign(num_cells(), 0);
    t.assign(num_cells(), 0);
    m_sum.assign(num_groups * num_topics, 0);
    t_sum.assign(num_groups * num_topics, 0);
    base_tables.assign(num_topics * vocab_size, 0);
    topic_tables.assign(num_topics, 0);
}

std::int32_t CountState::q(std::size_t group, std::size_t topic, WordId w, WordId v) const {
    auto it = tables.find(cell(group, topic, w));
    if (it == tables.end()) return 0;
    return static_cast<std::int32_t>(std::count(it->second.begin(), it->second.end(), v));
}

std::size_t CountState::max_cell_customers() const {
    std::vector<std::size_t> counts(num_groups * vocab_size, 0);
    std::size_t best = 0;
    for (std::size_t p = 0; p < words.size(); ++p)
        best = std::max(best, ++counts[group_of(p) * vocab_size + words[p]]);
    return best;
}

void recount(CountState& s) {
    std::fill(s.n.begin(), s.n.end(), 0);
    std::fill(s.m.begin(), s.m.end(), 0);
    std::fill(s.t.begin(), s.t.end(), 0);
    std::fill(s.m_sum.begin(), s.m_sum.end(), 0);
    std::fill(s.t_sum.begin(), s.t_sum.end(), 0);
    std::fill(s.base_tables.begin(), s.base_tables.end(), 0);
    std::fill(s.topic_tables.begin(), s.topic_tables.end(), 0);
    for (std::size_t p = 0; p < s.num_positions(); ++p) {
        const auto k = s.z[p];
        const auto i = s.group_of(p);
        ++s.n[s.doc_topic(s.doc_of[p], k)];
        ++s.m[s.cell(i, k, s.words[p])];
        ++s.m_sum[s.group_topic(i, k)];
    }
    for (const auto& [c, dishes] : s.tables) {
        const std::size_t k = (c / s.vocab_size) % s.num_topics;
        const std::size_t i = c / (s.vocab_size * s.num_topics);
        s.t[c] = static_cast<std::int32_t>(dishes.size());
        s.t_sum[s.group_topic(i, k)] += s.t[c];
        for (WordId v : dishes) ++s.base_tables[s.topic_word(k, v)];
        s.topic_tables[k] += s.t[c];
    }
}

std::vector<std::string> consistency_violations(const CountState& s, const TransformMatrix* transform,
                                                ConsistencyOptions options) {
    std::vector<std::string> out;
    auto report = [&out](const std::string& msg) {
        if (out.size() < 64) out.push_back(msg);
    };
    const std::size_t K = s.num_topics;
    const std::size_t V = s.vocab_size;

    for (std::size_t p = 0; p < s.num_positions(); ++p)
        if (s.z[p] >= K) report("z out of range at position " + std::to_string(p));
    if (!out.empty()) return out;

    // Derive every count from scratch and compare.
    std::vector<std::int32_t> n(s.n.size(), 0), m(s.m.size(), 0), m_sum(s.m_sum.size(), 0);
    std::vector<std::int32_t> heads(s.m.size(), 0);
    for (std::size_t p = 0; p < s.num_positions(); ++p) {
        const auto c = s.cell(s.group_of(p), s.z[p], s.words[p]);
        ++n[s.doc_topic(s.doc_of[p], s.z[p])];
        ++m[c];
        ++m_sum[s.group_topic(s.group_of(p), s.z[p])];
        heads[c] += s.r[p] ? 1 : 0;
    }
    for (std::size_t d = 0; d < s.num_documents(); ++d) {
        std::int64_t total = 0;
        for (std::size_t k = 0; k < K; ++k) total += s.n[s.doc_topic(d, k)];
        if (total != static_cast<std::int64_t>(s.doc_length(d)))
            report("document " + std::to_string(d) + ": sum of n differs from its length");
    }
    for (std::size_t j = 0; j < n.size(); ++j)
        if (n[j] != s.n[j]) report("n[" + std::to_string(j) + "] is " + std::to_string(s.n[j]) + ", recount gives " +
                                   std::to_string(n[j]));
    if (m_sum != s.m_sum) report("m_sum differs from recount");

    std::vector<std::int32_t> t_sum(s.t_sum.size(), 0), base(s.base_tables.size(), 0), topic(K, 0);
    for (std::size_t c = 0; c < s.num_cells(); ++c) {
        const std::size_t w = c % V;
        const std::size_t k = (c / V) % K;
        const std::size_t i = c / (V * K);
        auto where = [&] {
            return "cell (" + std::to_string(i) + "," + std::to_string(k) + "," + std::to_string(w) + ")";
        };
        if (m[c] != s.m[c]) report(where() + ": m is " + std::to_string(s.m[c]) + ", recount gives " + std::to_string(m[c]));
        if (s.t[c] < 0 || s.t[c] > s.m[c]) report(where() + ": t = " + std::to_string(s.t[c]) + " outside [0, m]");
        if (s.m[c] >= 1 && s.t[c] < 1) report(where() + ": customers without a table");
        auto it = s.tables.find(c);
        const std::size_t listed = it == s.tables.end() ? 0 : it->second.size();
        if (it != s.tables.end() && listed == 0) report(where() + ": empty table list stored");
        if (listed != static_cast<std::size_t>(std::max(s.t[c], 0)))
            report(where() + ": table list length " + std::to_string(listed) + " differs from t");
        if (options.check_indicators && heads[c] != s.t[c])
            report(where() + ": " + std::to_string(heads[c]) + " table indicators set, t = " + std::to_string(s.t[c]));
        t_sum[i * K + k] += s.t[c];
        topic[k] += s.t[c];
        if (it != s.tables.end())
            for (WordId v : it->second) {
                if (v >= V) {
                    report(where() + ": dish out of range");
                    continue;
                }
                ++base[k * V + v];
                if (transform && transform->value(i, static_cast<WordId>(w), v) <= 0.0)
                    report(where() + ": dish " + std::to_string(v) + " outside the transform row");
            }
    }
    if (t_sum != s.t_sum) report("t_sum differs from recount");
    if (base != s.base_tables) report("base table counts differ from table lists");
    if (topic != s.topic_tables) report("topic table totals differ from table lists");
    return out;
}

void require_consistent(const CountState& state, const TransformMatrix* transform, ConsistencyOptions options) {
    auto violations = consistency_violations(state, transform, options);
    if (violations.empty()) return;
    std::ostringstream msg;
    msg << "inconsistent sampler state (" << violations.size() << (violations.size() >= 64 ? "+" : "")
        << " violations)";
    for (std::size_t j = 0; j < violations.size() && j < 5; ++j) msg << "\n  " << violations[j];
    throw IntegrityError(msg.str());
}

std::size_t reconcile_indicators(CountState& s) {
    std::vector<std::int32_t> excess(s.num_cells(), 0);
    for (std::size_t p = 0; p < s.num_positions(); ++p)
        if (s.r[p]) ++excess[s.cell(s.group_of(p), s.z[p], s.words[p])];
    bool any = false;
    for (std::size_t c = 0; c < excess.size(); ++c) {
        excess[c] -= s.t[c];
        any = any || excess[c] != 0;
    }
    if (!any) return 0;

    std::size_t flips = 0;
    for (std::size_t p = 0; p < s.num_positions(); ++p) {
        auto& e = excess[s.cell(s.group_of(p), s.z[p], s.words[p])];
        if (e > 0 && s.r[p]) {
            s.r[p] = 0;
            --e;
            ++flips;
        } else if (e < 0 && !s.r[p]) {
            s.r[p] = 1;
            ++e;
            ++flips;
        }
    }
    return flips;
}

}  // namespace spdp
