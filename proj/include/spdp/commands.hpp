#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "spdp/config.hpp"
#include "spdp/eval.hpp"
#include "spdp/snapshot.hpp"

namespace spdp {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1;
inline constexpr int data = 2;
inline constexpr int integrity = 3;
}  // namespace exit_code

/// Maps the library's exception types onto process exit codes.
int exit_code_for(const std::exception& error);

/// Runs `body`, printing any error to `err` and returning its exit code.
int run_guarded(const std::function<void()>& body, std::ostream& err);

/// Per-group transform triplets from a text file: "group row_word
/// column_word value" per line, '#' comments allowed. Rows a listed group
/// leaves out are identity rows.
TransformMatrix load_transform(const std::filesystem::path& path, const Corpus& corpus);

struct TrainResult {
    std::vector<PerplexityReport> evaluations;
    std::vector<std::uint64_t> evaluated_iterations;
    std::vector<double> seconds;  // per iteration, sampling only
    Snapshot final;
};

/// Trains as configured and writes into config.out:
///   config.txt       effective configuration
///   perplexity.csv   iteration,overall,group:<name>,...
///   timings.csv      iteration,seconds,tokens_per_second
///   snapshots/iter-<n>.snap   every snapshot_every iterations
///   final.snap, estimate.txt
/// With zero iterations only config.txt and final.snap (the initial state)
/// are written.
TrainResult train(const RunConfig& config, std::ostream& log);

/// Topic table of a snapshot: per group and topic, its probability, rank
/// and top-n words.
std::string topics_report(const Snapshot& snapshot, std::size_t n);

/// Aligns B to A on the base word distributions. Throws LoadError when the
/// snapshots were trained on different corpora, ConfigError when K or V
/// differ.
TopicAlignment compare_snapshots(const Snapshot& a, const Snapshot& b);

/// Re-expresses `text` in the snapshot's vocabulary and group order.
/// Out-of-vocabulary tokens are dropped and counted in `dropped`. Throws
/// ConfigError when a group name is unknown to the snapshot.
Corpus map_to_snapshot(const Corpus& text, const Snapshot& snapshot, std::size_t& dropped);

/// Held-out perplexity of new documents under a trained snapshot.
PerplexityReport evaluate_snapshot(const Snapshot& snapshot, const Corpus& mapped, unsigned fold_in_iterations,
                                   std::uint64_t seed);

int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_topics(const std::filesystem::path& snapshot, std::size_t n, std::ostream& out, std::ostream& err);
int cmd_evaluate(const std::filesystem::path& snapshot, const std::vector<GroupSource>& corpora,
                 const std::optional<std::filesystem::path>& stopwords, unsigned fold_in_iterations,
                 std::uint64_t seed, std::ostream& out, std::ostream& err);
int cmd_compare(const std::filesystem::path& a, const std::filesystem::path& b,
                const std::filesystem::path& heatmap, std::ostream& out, std::ostream& err);

}  // namespace spdp
