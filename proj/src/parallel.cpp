#include "spdp/parallel.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "spdp/errors.hpp"

namespace spdp {

MergeMode parse_merge_mode(const std::string& text) {
    if (text == "shared") return MergeMode::shared;
    if (text == "delta") return MergeMode::delta;
    throw ConfigError("merge mode must be 'shared' or 'delta', got '" + text + "'");
}

std::string to_string(MergeMode mode) { return mode == MergeMode::shared ? "shared" : "delta"; }

CorrectionReport& CorrectionReport::operator+=(const CorrectionReport& o) {
    doc_topic_fixed += o.doc_topic_fixed;
    customers_fixed += o.customers_fixed;
    tables_raised += o.tables_raised;
    tables_lowered += o.tables_lowered;
    lists_resized += o.lists_resized;
    sums_fixed += o.sums_fixed;
    indicators_flipped += o.indicators_flipped;
    return *this;
}

namespace {

std::vector<std::size_t> doc_offsets(const Corpus& corpus) {
    std::vector<std::size_t> begin{0};
    for (const auto& g : corpus.groups)
        for (const auto& d : g.documents) begin.push_back(begin.back() + d.size());
    return begin;
}

}  // namespace

std::vector<std::uint32_t> reorder_words(const Corpus& corpus) {
    const auto begin = doc_offsets(corpus);
    const std::size_t docs = begin.size() - 1;
    std::vector<std::uint32_t> schedule;
    schedule.reserve(begin.back());

    std::vector<std::size_t> active(docs);
    std::iota(active.begin(), active.end(), std::size_t{0});
    for (std::size_t offset = 0; !active.empty(); ++offset) {
        std::size_t kept = 0;
        for (std::size_t d : active) {
            const std::size_t len = begin[d + 1] - begin[d];
            if (offset >= len) continue;
            schedule.push_back(static_cast<std::uint32_t>(begin[d] + offset));
            if (offset + 1 < len) active[kept++] = d;
        }
        active.resize(kept);
    }
    return schedule;
}

std::vector<std::uint32_t> partition_documents(const Corpus& corpus, unsigned devices, std::uint64_t seed) {
    if (devices == 0) throw ConfigError("device count must be at least 1");
    const auto begin = doc_offsets(corpus);
    const std::size_t docs = begin.size() - 1;

    std::vector<std::size_t> order(docs);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto rng = RngStream::keyed(seed, stream_domain::partition, devices);
    for (std::size_t j = docs; j > 1; --j) std::swap(order[j - 1], order[rng.below(j)]);

    std::vector<std::uint32_t> device(docs, 0);
    std::vector<std::size_t> load(devices, 0);
    for (std::size_t d : order) {
        const auto g = static_cast<std::size_t>(std::min_element(load.begin(), load.end()) - load.begin());
        device[d] = static_cast<std::uint32_t>(g);
        load[g] += begin[d + 1] - begin[d];
    }
    return device;
}

WorkPlan make_plan(const Corpus& corpus, std::size_t topics, std::size_t max_row_nonzeros,
                   const ParallelOptions& options, std::uint64_t seed) {
    if (options.workers == 0) throw ConfigError("worker count must be at least 1");
    if (options.wave_budget == 0) throw ConfigError("wave budget must be at least 1");

    WorkPlan plan;
    plan.schedule = reorder_words(corpus);
    plan.device_of_doc = partition_documents(corpus, options.devices, seed);
    plan.wave_budget = options.wave_budget;
    plan.workgroup_size = topics * (max_row_nonzeros + 1);

    const auto begin = doc_offsets(corpus);
    std::vector<std::uint32_t> doc_of(begin.back());
    for (std::size_t d = 0; d + 1 < begin.size(); ++d)
        for (std::size_t p = begin[d]; p < begin[d + 1]; ++p) doc_of[p] = static_cast<std::uint32_t>(d);

    plan.device_schedule.resize(options.devices);
    for (std::size_t j = 0; j < plan.schedule.size(); ++j) {
        const auto pos = plan.schedule[j];
        plan.device_schedule[plan.device_of_doc[doc_of[pos]]].push_back({static_cast<std::uint32_t>(j), pos});
    }

    const std::size_t per_device = std::max<std::size_t>(1, options.wave_budget / options.devices);
    std::size_t longest = 0;
    for (const auto& s : plan.device_schedule) longest = std::max(longest, s.size());
    for (std::size_t start = 0; start < longest; start += per_device) {
        Wave wave;
        for (const auto& s : plan.device_schedule) {
            wave.begin.push_back(std::min(start, s.size()));
            wave.end.push_back(std::min(start + per_device, s.size()));
        }
        plan.waves.push_back(std::move(wave));
    }
    return plan;
}

CorrectionReport error_correct(CountState& s, const TransformMatrix& transform) {
    CorrectionReport rep;
    const std::size_t K = s.num_topics;
    const std::size_t V = s.vocab_size;

    std::vector<std::int32_t> n(s.num_documents() * K, 0);
    std::vector<std::int32_t> m(s.num_cells(), 0);
    for (std::size_t p = 0; p < s.num_positions(); ++p) {
        ++n[s.doc_topic(s.doc_of[p], s.z[p])];
        ++m[s.cell(s.group_of(p), s.z[p], s.words[p])];
    }
    for (std::size_t j = 0; j < n.size(); ++j) rep.doc_topic_fixed += n[j] != s.n[j];
    for (std::size_t c = 0; c < m.size(); ++c) rep.customers_fixed += m[c] != s.m[c];
    s.n = std::move(n);
    s.m = std::move(m);

    for (std::size_t c = 0; c < s.num_cells(); ++c) {
        const std::int32_t lo = std::min(1, s.m[c]);
        if (s.t[c] < lo) {
            s.t[c] = lo;
            ++rep.tables_raised;
        } else if (s.t[c] > s.m[c]) {
            s.t[c] = s.m[c];
            ++rep.tables_lowered;
        }
        const auto want = static_cast<std::size_t>(s.t[c]);
        auto it = s.tables.find(c);
        const std::size_t have = it == s.tables.end() ? 0 : it->second.size();
        if (have == want) continue;
        ++rep.lists_resized;
        if (want == 0) {
            s.tables.erase(it);
            continue;
        }
        auto& list = s.tables[c];
        if (want < have) {
            list.resize(want);
        } else {
            const auto row = transform.row(c / (V * K), static_cast<WordId>(c % V));
            const auto heaviest = std::max_element(row.begin(), row.end(), [](const auto& a, const auto& b) {
                return a.value < b.value;
            });
            list.resize(want, heaviest->column);
        }
    }

    std::vector<std::int32_t> m_sum(s.num_groups * K, 0), t_sum(s.num_groups * K, 0);
    std::vector<std::int32_t> base(K * V, 0), topic(K, 0);
    for (std::size_t c = 0; c < s.num_cells(); ++c) {
        m_sum[c / V] += s.m[c];
        t_sum[c / V] += s.t[c];
    }
    for (const auto& [c, list] : s.tables) {
        const std::size_t k = (c / V) % K;
        for (WordId v : list) ++base[k * V + v];
        topic[k] += static_cast<std::int32_t>(list.size());
    }
    auto replace = [&rep](std::vector<std::int32_t>& dst, std::vector<std::int32_t>& src) {
        for (std::size_t j = 0; j < src.size(); ++j) rep.sums_fixed += src[j] != dst[j];
        dst = std::move(src);
    };
    replace(s.m_sum, m_sum);
    replace(s.t_sum, t_sum);
    replace(s.base_tables, base);
    replace(s.topic_tables, topic);

    rep.indicators_flipped = reconcile_indicators(s);
    return rep;
}

std::vector<std::int32_t> merge_device_tables(const std::vector<std::int32_t>& before,
                                              const std::vector<std::vector<std::int32_t>>& devices) {
    std::vector<std::int32_t> merged = before;
    for (const auto& dev : devices) {
        if (dev.size() != before.size()) throw IntegrityError("device table snapshot has the wrong size");
        for (std::size_t c = 0; c < merged.size(); ++c) merged[c] += dev[c] - before[c];
    }
    return merged;
}

SharedCounts SharedCounts::from(const CountState& s) {
    return {s.n, s.m, s.t, s.m_sum, s.t_sum, s.base_tables, s.topic_tables};
}

namespace {

struct KernelScratch {
    std::vector<TopicCounts> counts;
    std::vector<double> log_weights;
    std::vector<double> scratch;
};

/// One workgroup: snapshot, remove, propose, sample, add.
void process_position(CountState& s, SharedCounts& sc, std::size_t pos, const SamplerContext& ctx, RngStream& rng,
                      KernelScratch& ks) {
    using SC = SharedCounts;
    const auto& hyper = ctx.hyper();
    const std::size_t K = s.num_topics;
    const auto i = s.group_of(pos);
    const auto d = s.doc_of[pos];
    const WordId w = s.words[pos];
    const auto own = s.z[pos];

    // Local copy of everything the proposals read, clamped into range.
    ks.counts.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        const auto c = s.cell(i, k, w);
        const auto gk = s.group_topic(i, k);
        auto& tc = ks.counts[k];
        const std::int64_t floor = k == own ? 1 : 0;
        tc.doc_topic = std::max<std::int64_t>(floor, SC::load(sc.n, s.doc_topic(d, k)));
        tc.cell_customers = std::max<std::int64_t>(floor, SC::load(sc.m, c));
        tc.cell_tables = std::clamp<std::int64_t>(SC::load(sc.t, c), std::min<std::int64_t>(1, tc.cell_customers),
                                                  tc.cell_customers);
        tc.topic_customers = std::max<std::int64_t>(tc.cell_customers, SC::load(sc.m_sum, gk));
        tc.topic_tables = std::max<std::int64_t>(tc.cell_tables, SC::load(sc.t_sum, gk));
        tc.topic_customers = std::max(tc.topic_customers, tc.topic_tables);
        tc.base_total = std::max<std::int64_t>(tc.topic_tables, SC::load(sc.topic_tables, k));
    }
    // Under the identity every table of cell (i,k,w) serves dish w.
    std::vector<std::int64_t> base(K);
    for (std::size_t k = 0; k < K; ++k) {
        base[k] = std::max<std::int64_t>(ks.counts[k].cell_tables, SC::load(sc.base_tables, s.topic_word(k, w)));
        ks.counts[k].base_total = std::max(ks.counts[k].base_total, base[k]);
    }

    // Removal, drawn from the local view.
    auto& mine = ks.counts[own];
    const auto own_cell = s.cell(i, own, w);
    const auto own_gk = s.group_topic(i, own);
    const bool removed_table =
        rng.bernoulli(static_cast<double>(mine.cell_tables) / static_cast<double>(mine.cell_customers));
    --mine.doc_topic;
    --mine.cell_customers;
    --mine.topic_customers;
    SC::add(sc.n, s.doc_topic(d, own), -1);
    SC::add(sc.m, own_cell, -1);
    SC::add(sc.m_sum, own_gk, -1);
    if (removed_table) {
        // Table choice is immaterial under the identity (every dish is w) but
        // consumes the same draw as the sequential sampler.
        rng.below(static_cast<std::uint64_t>(mine.cell_tables));
        --mine.cell_tables;
        --mine.topic_tables;
        --mine.base_total;
        --base[own];
        SC::add(sc.t, own_cell, -1);
        SC::add(sc.t_sum, own_gk, -1);
        SC::add(sc.base_tables, s.topic_word(own, w), -1);
        SC::add(sc.topic_tables, own, -1);
    }

    // Proposals, laid out as in compute_proposals: [join, open] per topic.
    ks.log_weights.resize(2 * K);
    bool any_forced = false;
    for (std::size_t k = 0; k < K; ++k) {
        const auto terms = topic_log_terms(ks.counts[k], hyper.alpha[i][k], hyper.discount[k],
                                           hyper.concentration[k], ctx.beta_sum(), ctx.stirling().for_topic(k));
        any_forced = any_forced || terms.forced;
        ks.log_weights[2 * k] = terms.join;
        ks.log_weights[2 * k + 1] = dish_log_weight(terms.open, 1.0, hyper.beta[w], base[k]);
    }
    if (any_forced)
        for (std::size_t k = 0; k < K; ++k) {
            const auto& tc = ks.counts[k];
            if (tc.cell_customers >= 1 && tc.cell_tables == 0) continue;
            ks.log_weights[2 * k] = ks.log_weights[2 * k + 1] = neg_inf;
        }

    const auto pick = sample_categorical(ks.log_weights, rng, ks.scratch);
    const auto k = static_cast<std::uint32_t>(pick / 2);
    const bool new_table = pick % 2 == 1;
    const auto c = s.cell(i, k, w);
    const auto gk = s.group_topic(i, k);
    SC::add(sc.n, s.doc_topic(d, k), 1);
    SC::add(sc.m, c, 1);
    SC::add(sc.m_sum, gk, 1);
    if (new_table) {
        SC::add(sc.t, c, 1);
        SC::add(sc.t_sum, gk, 1);
        SC::add(sc.base_tables, s.topic_word(k, w), 1);
        SC::add(sc.topic_tables, k, 1);
    }
    s.z[pos] = k;
    s.r[pos] = new_table ? 1 : 0;
}

}  // namespace

CorrectionReport run_parallel_iteration(CountState& state, const WorkPlan& plan, const SamplerContext& ctx,
                                        unsigned workers, MergeMode merge, std::uint64_t seed,
                                        std::uint64_t iteration) {
    if (!ctx.transform().is_identity())
        throw UnsupportedError("the parallel sampler supports only the identity transform");
    if (workers == 0) throw ConfigError("worker count must be at least 1");
    if (plan.schedule.size() != state.num_positions())
        throw ConfigError("work plan does not match the state (" + std::to_string(plan.schedule.size()) + " vs " +
                          std::to_string(state.num_positions()) + " positions)");

    const std::size_t G = plan.num_devices();
    CorrectionReport report;
    for (const auto& wave : plan.waves) {
        std::vector<SharedCounts> views;
        if (merge == MergeMode::shared)
            views.push_back(SharedCounts::from(state));
        else
            views.assign(G, SharedCounts::from(state));

        std::vector<std::atomic<std::size_t>> next(G);
        for (auto& x : next) x.store(0);
        std::exception_ptr failure;
        std::mutex failure_mutex;

        auto work = [&](std::size_t g) {
            KernelScratch ks;
            auto& view = views[merge == MergeMode::shared ? 0 : g];
            const std::size_t count = wave.end[g] - wave.begin[g];
            try {
                for (std::size_t j; (j = next[g].fetch_add(1)) < count;) {
                    const auto& slot = plan.device_schedule[g][wave.begin[g] + j];
                    auto rng = RngStream::keyed(seed, stream_domain::sweep, iteration, slot.index);
                    process_position(state, view, slot.position, ctx, rng, ks);
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next[g].store(count);
            }
        };

        if (G * workers == 1) {
            work(0);
        } else {
            std::vector<std::jthread> threads;
            for (std::size_t g = 0; g < G; ++g)
                for (unsigned t = 0; t < workers; ++t) threads.emplace_back(work, g);
        }
        if (failure) std::rethrow_exception(failure);

        // Every array is merged so the correction report measures staleness;
        // error_correct then regenerates what is derivable from z.
        auto merge_field = [&](std::vector<std::int32_t> CountState::*dst, std::vector<std::int32_t> SharedCounts::*src) {
            if (merge == MergeMode::shared) {
                state.*dst = std::move(views[0].*src);
                return;
            }
            std::vector<std::vector<std::int32_t>> per_device;
            for (auto& v : views) per_device.push_back(std::move(v.*src));
            state.*dst = merge_device_tables(state.*dst, per_device);
        };
        merge_field(&CountState::n, &SharedCounts::n);
        merge_field(&CountState::m, &SharedCounts::m);
        merge_field(&CountState::t, &SharedCounts::t);
        merge_field(&CountState::m_sum, &SharedCounts::m_sum);
        merge_field(&CountState::t_sum, &SharedCounts::t_sum);
        merge_field(&CountState::base_tables, &SharedCounts::base_tables);
        merge_field(&CountState::topic_tables, &SharedCounts::topic_tables);
        report += error_correct(state, ctx.transform());
    }
    return report;
}

}  // namespace spdp
