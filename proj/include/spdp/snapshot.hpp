#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "spdp/corpus.hpp"
#include "spdp/count_state.hpp"
#include "spdp/hyperparameters.hpp"
#include "spdp/transform.hpp"

namespace spdp {

/// Everything needed to resume or inspect a run: the training corpus, the
/// priors, the transform and the sampler state.
struct Snapshot {
    Corpus corpus;
    Hyperparameters hyper;
    TransformMatrix transform;
    CountState state;
    std::uint64_t iteration = 0;
    std::uint64_t seed = 0;
};

/// Text format, version 1. Sections in order:
///   HEADER    key value lines (groups, topics, vocab, documents, positions,
///             fingerprint, iteration, seed, transform, alpha, beta,
///             discount, concentration)
///   VOCAB     one word per line
///   GROUPS    "<documents> <name>" per group
///   DOCS      word ids, one document per line
///   Z         topic ids, one document per line
///   R         table indicators as 0/1 strings, one document per line
///   VLISTS    "i k w v..." per non-empty cell, cells ascending
///   TRANSFORM "group row column value" per nonzero (sparse transforms only)
///   END
/// Counts are not stored; loading regenerates them and checks consistency.
std::string snapshot_text(const Snapshot& snapshot);
void save_snapshot(const Snapshot& snapshot, const std::filesystem::path& path);

/// Throws IntegrityError naming the offending section.
Snapshot parse_snapshot(std::string_view text);
Snapshot load_snapshot(const std::filesystem::path& path);

}  // namespace spdp
