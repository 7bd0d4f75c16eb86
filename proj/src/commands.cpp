#include "spdp/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <ostream>
#include <sstream>

#include "spdp/errors.hpp"
#include "spdp/estimate.hpp"
#include "spdp/sampler.hpp"
#include "spdp/text_io.hpp"

namespace spdp {

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const IntegrityError*>(&e)) return exit_code::integrity;
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const UnsupportedError*>(&e)) return exit_code::usage;
    return exit_code::data;
}

int run_guarded(const std::function<void()>& body, std::ostream& err) {
    try {
        body();
        return exit_code::ok;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

TransformMatrix load_transform(const std::filesystem::path& path, const Corpus& corpus) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot read transform '" + path.string() + "'");
    std::vector<TransformTriplet> trip;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto f = text::split_fields(line);
        if (f.empty() || f[0].front() == '#') continue;
        auto where = path.string() + ": line " + std::to_string(line_no) + ": ";
        if (f.size() != 4) throw LoadError(where + "expected 'group row_word column_word value'");
        std::size_t group = corpus.num_groups();
        for (std::size_t i = 0; i < corpus.num_groups(); ++i)
            if (corpus.groups[i].name == f[0]) group = i;
        if (group == corpus.num_groups()) throw LoadError(where + "unknown group '" + std::string(f[0]) + "'");
        auto row = corpus.vocabulary->find(f[1]);
        auto col = corpus.vocabulary->find(f[2]);
        if (!row || !col) throw LoadError(where + "word not in the vocabulary");
        auto value = text::parse_number<double>(f[3]);
        if (!value) throw LoadError(where + "bad value");
        trip.push_back({group, *row, *col, *value});
    }
    std::set<std::pair<std::size_t, WordId>> listed;
    for (const auto& t : trip) listed.insert({t.group, t.row});
    std::set<std::size_t> groups;
    for (const auto& t : trip) groups.insert(t.group);
    for (auto g : groups)
        for (WordId w = 0; w < corpus.vocab_size(); ++w)
            if (!listed.count({g, w})) trip.push_back({g, w, w, 1.0});
    return TransformMatrix::from_triplets(corpus.num_groups(), corpus.vocab_size(), trip);
}

namespace {

std::string snapshot_name(std::uint64_t iteration) {
    std::ostringstream s;
    s << "iter-" << std::setw(6) << std::setfill('0') << iteration << ".snap";
    return s.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw LoadError("cannot write '" + path.string() + "'");
}

}  // namespace

TrainResult train(const RunConfig& config, std::ostream& log) {
    config.validate();
    const auto corpus = load_corpus(config.corpora, config.stopwords);
    if (corpus.token_count() == 0) throw LoadError("the corpus has no tokens after tokenization");

    Corpus train_corpus = corpus;
    std::optional<Corpus> test;
    if (config.holdout > 0.0) {
        auto split = split_holdout(corpus, config.holdout, config.seed);
        train_corpus = std::move(split.train);
        test = std::move(split.test);
    }
    train_corpus = duplicate_training(train_corpus, config.duplicate);

    auto hyper = Hyperparameters::symmetric(config.topics, corpus.num_groups(), corpus.vocab_size(), config.alpha,
                                            config.beta, config.discount, config.concentration);
    auto transform = config.transform ? load_transform(*config.transform, corpus)
                                      : TransformMatrix::identity(corpus.num_groups(), corpus.vocab_size());

    std::filesystem::create_directories(config.out);
    write_text(config.out / "config.txt", config_text(config));

    TrainResult result;
    Snapshot& snap = result.final;
    snap.corpus = train_corpus;
    snap.hyper = hyper;
    snap.transform = transform;
    snap.seed = config.seed;
    snap.state = init_state(train_corpus, hyper, transform, config.seed);

    if (config.iterations == 0) {
        save_snapshot(snap, config.out / "final.snap");
        return result;
    }

    StirlingCache stirling(hyper.discount, required_stirling_size(snap.state));
    SamplerContext ctx(hyper, transform, stirling);
    WorkPlan plan;
    std::vector<std::uint32_t> order;
    if (config.mode == SamplerMode::parallel) {
        ParallelOptions opts{config.workers, config.devices, config.wave_budget, config.merge_mode};
        plan = make_plan(train_corpus, config.topics, transform.max_row_nonzeros(), opts, config.seed);
    } else {
        order = config.schedule == ScheduleOrder::reordered ? reorder_words(train_corpus) : corpus_order(snap.state);
    }

    std::ofstream perplexity_csv(config.out / "perplexity.csv");
    perplexity_csv << "iteration,overall";
    for (const auto& g : corpus.groups) perplexity_csv << ",group:" << g.name;
    perplexity_csv << "\n";
    std::ofstream timings_csv(config.out / "timings.csv");
    timings_csv << "iteration,seconds,tokens_per_second\n";
    if (config.snapshot_every > 0) std::filesystem::create_directories(config.out / "snapshots");

    const double tokens = static_cast<double>(snap.state.num_positions());
    for (std::uint64_t it = 1; it <= config.iterations; ++it) {
        const auto start = std::chrono::steady_clock::now();
        if (config.mode == SamplerMode::parallel)
            run_parallel_iteration(snap.state, plan, ctx, config.workers, config.merge_mode, config.seed, it - 1);
        else
            gibbs_sweep(snap.state, ctx, config.seed, it - 1, order);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result.seconds.push_back(secs);
        timings_csv << it << "," << text::format_double(secs) << "," << text::format_double(tokens / secs) << "\n";
        snap.iteration = it;

        const bool evaluate =
            test && config.eval_every > 0 && (it == 1 || it % config.eval_every == 0 || it == config.iterations);
        if (evaluate) {
            const auto est = estimate(snap.state, hyper, transform);
            auto rep = evaluate_heldout(*test, est, hyper, config.fold_in_iterations, config.seed);
            perplexity_csv << it << "," << text::format_double(rep.overall);
            for (double p : rep.per_group) perplexity_csv << "," << text::format_double(p);
            perplexity_csv << "\n" << std::flush;
            log << "iteration " << it << " perplexity " << rep.overall << "\n";
            result.evaluations.push_back(std::move(rep));
            result.evaluated_iterations.push_back(it);
        }
        if (config.snapshot_every > 0 && it % config.snapshot_every == 0)
            save_snapshot(snap, config.out / "snapshots" / snapshot_name(it));
    }
    save_snapshot(snap, config.out / "final.snap");
    write_estimate(estimate(snap.state, hyper, transform), config.out / "estimate.txt");
    return result;
}

std::string topics_report(const Snapshot& snap, std::size_t n) {
    const auto est = estimate(snap.state, snap.hyper, snap.transform);
    std::ostringstream out;
    for (const auto& row : topic_table(est, n)) {
        out << "group " << snap.corpus.groups[row.group].name << " topic " << row.topic << " rank " << row.rank
            << " probability " << text::format_double(row.probability) << "\n ";
        for (const auto& w : row.words) out << " " << snap.corpus.vocabulary->word(w.word);
        out << "\n";
    }
    return out.str();
}

TopicAlignment compare_snapshots(const Snapshot& a, const Snapshot& b) {
    if (fingerprint(a.corpus) != fingerprint(b.corpus))
        throw LoadError("snapshots were trained on different corpora (fingerprint mismatch)");
    return align_and_heatmap(estimate(a.state, a.hyper, a.transform), estimate(b.state, b.hyper, b.transform));
}

Corpus map_to_snapshot(const Corpus& text, const Snapshot& snap, std::size_t& dropped) {
    Corpus mapped;
    mapped.vocabulary = snap.corpus.vocabulary;
    for (const auto& g : snap.corpus.groups) mapped.groups.push_back({g.name, {}});
    dropped = 0;
    for (const auto& g : text.groups) {
        std::size_t target = mapped.num_groups();
        for (std::size_t i = 0; i < mapped.num_groups(); ++i)
            if (mapped.groups[i].name == g.name) target = i;
        if (target == mapped.num_groups()) throw ConfigError("group '" + g.name + "' is not in the snapshot");
        for (const auto& doc : g.documents) {
            Document out;
            for (auto w : doc) {
                auto id = mapped.vocabulary->find(text.vocabulary->word(w));
                if (id)
                    out.push_back(*id);
                else
                    ++dropped;
            }
            if (!out.empty()) mapped.groups[target].documents.push_back(std::move(out));
        }
    }
    return mapped;
}

PerplexityReport evaluate_snapshot(const Snapshot& snap, const Corpus& mapped, unsigned fold_in_iterations,
                                   std::uint64_t seed) {
    const auto est = estimate(snap.state, snap.hyper, snap.transform);
    return evaluate_heldout(mapped, est, snap.hyper, fold_in_iterations, seed);
}

int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return run_guarded([&] {
        auto result = train(config, out);
        out << "wrote " << (config.out / "final.snap").string() << "\n";
    }, err);
}

int cmd_topics(const std::filesystem::path& snapshot, std::size_t n, std::ostream& out, std::ostream& err) {
    return run_guarded([&] { out << topics_report(load_snapshot(snapshot), n); }, err);
}

int cmd_evaluate(const std::filesystem::path& snapshot, const std::vector<GroupSource>& corpora,
                 const std::optional<std::filesystem::path>& stopwords, unsigned fold_in_iterations,
                 std::uint64_t seed, std::ostream& out, std::ostream& err) {
    return run_guarded([&] {
        if (corpora.empty()) throw ConfigError("at least one --corpus name=path is required");
        const auto snap = load_snapshot(snapshot);
        std::size_t dropped = 0;
        const auto mapped = map_to_snapshot(load_corpus(corpora, stopwords), snap, dropped);
        const auto rep = evaluate_snapshot(snap, mapped, fold_in_iterations, seed);
        out << "tokens " << rep.tokens << "\nout_of_vocabulary " << dropped << "\nperplexity "
            << text::format_double(rep.overall) << "\n";
        for (std::size_t i = 0; i < rep.per_group.size(); ++i)
            out << "group " << rep.group_names[i] << " " << text::format_double(rep.per_group[i]) << "\n";
    }, err);
}

int cmd_compare(const std::filesystem::path& a, const std::filesystem::path& b,
                const std::filesystem::path& heatmap, std::ostream& out, std::ostream& err) {
    return run_guarded([&] {
        const auto al = compare_snapshots(load_snapshot(a), load_snapshot(b));
        write_heatmap(al, heatmap);
        out << "permutation";
        for (auto k : al.permutation) out << " " << k;
        out << "\nmatched_mean_hellinger " << text::format_double(al.matched_mean()) << "\n";
    }, err);
}

}  // namespace spdp
