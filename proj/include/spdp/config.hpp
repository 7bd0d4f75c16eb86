#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spdp/corpus.hpp"
#include "spdp/parallel.hpp"

namespace spdp {

enum class SamplerMode { sequential, parallel };
enum class ScheduleOrder { corpus, reordered };

/// Settings of one training run. Stored as a flat key=value file; the
/// command-line flags go through the same setters.
struct RunConfig {
    std::vector<GroupSource> corpora;
    std::optional<std::filesystem::path> stopwords;
    std::optional<std::filesystem::path> transform;
    std::size_t topics = 16;
    std::uint64_t iterations = 2000;
    std::uint64_t eval_every = 10;
    std::uint64_t snapshot_every = 0;
    double alpha = 0.1;
    double beta = 0.1;
    double discount = 0.7;
    double concentration = 100.0;
    SamplerMode mode = SamplerMode::sequential;
    ScheduleOrder schedule = ScheduleOrder::corpus;  // sequential mode only
    unsigned workers = 1;
    unsigned devices = 1;
    std::size_t wave_budget = std::size_t{1} << 20;
    MergeMode merge_mode = MergeMode::shared;
    unsigned duplicate = 1;
    double holdout = 0.1;  // 0 disables held-out evaluation
    std::uint64_t seed = 1;
    std::filesystem::path out = "spdp-out";
    unsigned fold_in_iterations = 10;

    bool operator==(const RunConfig&) const = default;

    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

/// Applies one setting by its file key (flags use the same names with
/// dashes). "corpus" takes "name=path" and appends. Throws ConfigError.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Every setting as "key=value" lines, one corpus line per group.
std::string config_text(const RunConfig& config);

/// Parses config_text output; blank lines and '#' comments are skipped.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace spdp
