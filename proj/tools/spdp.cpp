#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spdp/commands.hpp"
#include "spdp/errors.hpp"

namespace {

// Flags that map onto RunConfig keys; dashes become underscores.
const std::vector<std::string> kTrainFlags = {
    "stopwords", "transform", "topics",   "iterations", "alpha",     "beta",           "discount",
    "concentration", "mode",  "schedule", "workers",    "devices",   "wave-budget",    "merge-mode",
    "duplicate", "holdout",   "seed",     "out",        "eval-every", "snapshot-every", "fold-in-iterations"};

std::string key_of(std::string flag) {
    for (auto& c : flag)
        if (c == '-') c = '_';
    return flag;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shadow Poisson-Dirichlet topic model for differential topic modelling"};
    app.require_subcommand(1);

    auto* train = app.add_subcommand("train", "train a model and write artifacts into --out");
    std::string config_path;
    std::vector<std::string> corpora;
    std::map<std::string, std::string> flags;
    train->add_option("--config", config_path, "key=value config file; flags override it");
    train->add_option("--corpus", corpora, "group corpus as name=path, one document per line")->take_all();
    for (const auto& f : kTrainFlags) train->add_option("--" + f, flags[f]);

    auto* topics = app.add_subcommand("topics", "print the topic table of a snapshot");
    std::string topics_snapshot;
    std::size_t top_n = 50;
    topics->add_option("snapshot", topics_snapshot)->required();
    topics->add_option("-n,--top", top_n, "words per topic");

    auto* evaluate = app.add_subcommand("evaluate", "held-out perplexity of new documents under a snapshot");
    std::string eval_snapshot;
    std::vector<std::string> eval_corpora;
    std::string eval_stopwords;
    unsigned eval_fold_in = 10;
    std::uint64_t eval_seed = 1;
    evaluate->add_option("snapshot", eval_snapshot)->required();
    evaluate->add_option("--corpus", eval_corpora, "name=path, names as in the snapshot")->take_all();
    evaluate->add_option("--stopwords", eval_stopwords);
    evaluate->add_option("--fold-in-iterations", eval_fold_in);
    evaluate->add_option("--seed", eval_seed);

    auto* compare = app.add_subcommand("compare", "align the topics of two snapshots");
    std::string snap_a, snap_b, heatmap = "heatmap.txt";
    compare->add_option("a", snap_a)->required();
    compare->add_option("b", snap_b)->required();
    compare->add_option("--heatmap", heatmap, "output path of the K x K distance matrix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? spdp::exit_code::ok : spdp::exit_code::usage;
    }

    if (*train) {
        spdp::RunConfig config;
        const int code = spdp::run_guarded([&] {
            if (!config_path.empty()) config = spdp::load_config(config_path);
            for (const auto& c : corpora) spdp::apply_setting(config, "corpus", c);
            for (const auto& f : kTrainFlags)
                if (train->count("--" + f) > 0) spdp::apply_setting(config, key_of(f), flags[f]);
            config.validate();
        }, std::cerr);
        if (code != spdp::exit_code::ok) return code;
        return spdp::cmd_train(config, std::cout, std::cerr);
    }
    if (*topics) return spdp::cmd_topics(topics_snapshot, top_n, std::cout, std::cerr);
    if (*evaluate) {
        std::vector<spdp::GroupSource> sources;
        const int code = spdp::run_guarded([&] {
            spdp::RunConfig parsed;
            for (const auto& c : eval_corpora) spdp::apply_setting(parsed, "corpus", c);
            sources = parsed.corpora;
        }, std::cerr);
        if (code != spdp::exit_code::ok) return code;
        std::optional<std::filesystem::path> stop;
        if (!eval_stopwords.empty()) stop = eval_stopwords;
        return spdp::cmd_evaluate(eval_snapshot, sources, stop, eval_fold_in, eval_seed, std::cout, std::cerr);
    }
    return spdp::cmd_compare(snap_a, snap_b, heatmap, std::cout, std::cerr);
}
