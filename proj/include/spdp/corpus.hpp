#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace spdp {

using WordId = std::uint32_t;
using Document = std::vector<WordId>;

/// Dense word <-> id mapping. Ids are assigned in first-seen order.
class Vocabulary {
public:
    WordId intern(std::string_view word);
    std::optional<WordId> find(std::string_view word) const;

    const std::string& word(WordId id) const { return words_.at(id); }
    std::size_t size() const { return words_.size(); }
    const std::vector<std::string>& words() const { return words_; }

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, WordId> ids_;
};

struct Group {
    std::string name;
    std::vector<Document> documents;

    std::size_t token_count() const;
};

/// Grouped document collection over one shared vocabulary.
///
/// The vocabulary is shared (not copied) between corpora derived from the
/// same load, so a train/test split always agrees on word ids.
struct Corpus {
    std::vector<Group> groups;
    std::shared_ptr<const Vocabulary> vocabulary;

    std::size_t vocab_size() const { return vocabulary ? vocabulary->size() : 0; }
    std::size_t num_groups() const { return groups.size(); }
    std::size_t num_documents() const;
    std::size_t token_count() const;
    std::size_t max_document_length() const;
};

struct HoldoutSplit {
    Corpus train;
    Corpus test;
    double fraction = 0.0;
    std::uint64_t seed = 0;
};

using StopwordSet = std::unordered_set<std::string>;

/// Lowercase, split on whitespace, strip leading/trailing non-alphanumeric
/// characters, then drop empty, purely numeric and stop-listed tokens.
/// Bytes >= 0x80 (UTF-8 continuation/lead bytes) count as alphanumeric.
std::vector<std::string> tokenize(std::string_view raw_text, const StopwordSet& stopwords);

/// True when `text` is well-formed UTF-8.
bool is_valid_utf8(std::string_view text);

/// One word per line; blank lines and lines starting with '#' are skipped.
StopwordSet load_stopwords(const std::filesystem::path& path);

struct GroupSource {
    std::string name;
    std::filesystem::path path;

    bool operator==(const GroupSource&) const = default;
};

/// Loads one group per file, one document per line. Documents that tokenize
/// to nothing are dropped.
Corpus load_corpus(const std::vector<GroupSource>& sources,
                   const std::optional<std::filesystem::path>& stopword_path = std::nullopt);

/// Builds a corpus from in-memory text lines (one vector of lines per group).
Corpus corpus_from_lines(const std::vector<std::pair<std::string, std::vector<std::string>>>& groups,
                         const StopwordSet& stopwords = {});

HoldoutSplit split_holdout(const Corpus& corpus, double fraction, std::uint64_t seed);

Corpus duplicate_training(const Corpus& corpus, unsigned copies);

/// FNV-1a over vocabulary strings and token ids; identifies a corpus in
/// snapshots.
std::uint64_t fingerprint(const Corpus& corpus);

}  // namespace spdp
