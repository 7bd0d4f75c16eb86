#include "spdp/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "spdp/errors.hpp"
#include "spdp/rng.hpp"

namespace spdp {

namespace {

bool is_token_char(unsigned char c) {
    return c >= 0x80 || (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Digits with optional '.' / ',' separators, e.g. "2011", "1,000", "3.5".
bool is_numeric(std::string_view token) {
    bool digit = false;
    for (unsigned char c : token) {
        if (c >= '0' && c <= '9')
            digit = true;
        else if (c != '.' && c != ',')
            return false;
    }
    return digit;
}

std::string strip_newline(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

}  // namespace

WordId Vocabulary::intern(std::string_view word) {
    auto it = ids_.find(std::string(word));
    if (it != ids_.end()) return it->second;
    auto id = static_cast<WordId>(words_.size());
    words_.emplace_back(word);
    ids_.emplace(words_.back(), id);
    return id;
}

std::optional<WordId> Vocabulary::find(std::string_view word) const {
    auto it = ids_.find(std::string(word));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

std::size_t Group::token_count() const {
    std::size_t total = 0;
    for (const auto& doc : documents) total += doc.size();
    return total;
}

std::size_t Corpus::num_documents() const {
    std::size_t total = 0;
    for (const auto& g : groups) total += g.documents.size();
    return total;
}

std::size_t Corpus::token_count() const {
    std::size_t total = 0;
    for (const auto& g : groups) total += g.token_count();
    return total;
}

std::size_t Corpus::max_document_length() const {
    std::size_t longest = 0;
    for (const auto& g : groups)
        for (const auto& doc : g.documents) longest = std::max(longest, doc.size());
    return longest;
}

std::vector<std::string> tokenize(std::string_view raw_text, const StopwordSet& stopwords) {
    std::vector<std::string> tokens;
    std::size_t pos = 0;
    while (pos < raw_text.size()) {
        while (pos < raw_text.size() && is_space(static_cast<unsigned char>(raw_text[pos]))) ++pos;
        std::size_t end = pos;
        while (end < raw_text.size() && !is_space(static_cast<unsigned char>(raw_text[end]))) ++end;
        std::string_view piece = raw_text.substr(pos, end - pos);
        pos = end;

        std::size_t first = 0;
        std::size_t last = piece.size();
        while (first < last && !is_token_char(static_cast<unsigned char>(piece[first]))) ++first;
        while (last > first && !is_token_char(static_cast<unsigned char>(piece[last - 1]))) --last;
        if (first == last) continue;

        std::string token(piece.substr(first, last - first));
        for (char& c : token)
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        if (is_numeric(token) || stopwords.contains(token)) continue;
        tokens.push_back(std::move(token));
    }
    return tokens;
}

bool is_valid_utf8(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size()) {
        auto c = static_cast<unsigned char>(text[i]);
        std::size_t extra = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            extra = 1;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            extra = 2;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            extra = 3;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + extra >= text.size()) return false;
        for (std::size_t j = 1; j <= extra; ++j) {
            auto cc = static_cast<unsigned char>(text[i + j]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        // Overlong forms, surrogates and out-of-range code points.
        if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000) ||
            (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF)
            return false;
        i += extra + 1;
    }
    return true;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open stopword file '" + path.string() + "'");
    StopwordSet words;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_newline(std::move(line));
        if (!is_valid_utf8(line))
            throw LoadError(path.string() + ": line " + std::to_string(line_no) + ": invalid UTF-8");
        auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        auto last = line.find_last_not_of(" \t");
        std::string word = line.substr(first, last - first + 1);
        for (char& c : word)
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        words.insert(std::move(word));
    }
    return words;
}

Corpus load_corpus(const std::vector<GroupSource>& sources,
                   const std::optional<std::filesystem::path>& stopword_path) {
    StopwordSet stopwords;
    if (stopword_path) stopwords = load_stopwords(*stopword_path);

    auto vocab = std::make_shared<Vocabulary>();
    Corpus corpus;
    for (const auto& source : sources) {
        for (const auto& g : corpus.groups)
            if (g.name == source.name) throw ConfigError("duplicate group name '" + source.name + "'");
        std::ifstream in(source.path);
        if (!in) throw LoadError("cannot open group file '" + source.path.string() + "'");
        Group group{source.name, {}};
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            line = strip_newline(std::move(line));
            if (!is_valid_utf8(line))
                throw LoadError(source.path.string() + ": line " + std::to_string(line_no) + ": invalid UTF-8");
            Document doc;
            for (const auto& token : tokenize(line, stopwords)) doc.push_back(vocab->intern(token));
            if (!doc.empty()) group.documents.push_back(std::move(doc));
        }
        if (in.bad()) throw LoadError("read error on '" + source.path.string() + "'");
        corpus.groups.push_back(std::move(group));
    }
    corpus.vocabulary = std::move(vocab);
    return corpus;
}

Corpus corpus_from_lines(const std::vector<std::pair<std::string, std::vector<std::string>>>& groups,
                         const StopwordSet& stopwords) {
    auto vocab = std::make_shared<Vocabulary>();
    Corpus corpus;
    for (const auto& [name, lines] : groups) {
        Group group{name, {}};
        for (const auto& line : lines) {
            Document doc;
            for (const auto& token : tokenize(line, stopwords)) doc.push_back(vocab->intern(token));
            if (!doc.empty()) group.documents.push_back(std::move(doc));
        }
        corpus.groups.push_back(std::move(group));
    }
    corpus.vocabulary = std::move(vocab);
    return corpus;
}

HoldoutSplit split_holdout(const Corpus& corpus, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ConfigError("holdout fraction must lie in (0, 1), got " + std::to_string(fraction));

    HoldoutSplit split;
    split.fraction = fraction;
    split.seed = seed;
    split.train.vocabulary = corpus.vocabulary;
    split.test.vocabulary = corpus.vocabulary;

    for (std::size_t gi = 0; gi < corpus.groups.size(); ++gi) {
        const auto& group = corpus.groups[gi];
        const std::size_t docs = group.documents.size();
        const auto held = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(docs)));
        if (docs < 2 || held < 1 || held >= docs)
            throw ConfigError("group '" + group.name + "' has " + std::to_string(docs) +
                              " documents; cannot hold out a fraction of " + std::to_string(fraction));

        // Partial Fisher-Yates: the first `held` slots are the test documents.
        std::vector<std::size_t> order(docs);
        std::iota(order.begin(), order.end(), 0);
        auto rng = RngStream::keyed(seed, stream_domain::holdout, gi);
        for (std::size_t j = 0; j < held; ++j) {
            auto pick = j + rng.below(docs - j);
            std::swap(order[j], order[pick]);
        }
        std::vector<bool> is_test(docs, false);
        for (std::size_t j = 0; j < held; ++j) is_test[order[j]] = true;

        Group train{group.name, {}};
        Group test{group.name, {}};
        for (std::size_t d = 0; d < docs; ++d)
            (is_test[d] ? test : train).documents.push_back(group.documents[d]);
        split.train.groups.push_back(std::move(train));
        split.test.groups.push_back(std::move(test));
    }
    return split;
}

Corpus duplicate_training(const Corpus& corpus, unsigned copies) {
    if (copies == 0) throw ConfigError("duplicate copies must be at least 1");
    Corpus out;
    out.vocabulary = corpus.vocabulary;
    for (const auto& group : corpus.groups) {
        Group g{group.name, {}};
        g.documents.reserve(group.documents.size() * copies);
        for (unsigned c = 0; c < copies; ++c)
            g.documents.insert(g.documents.end(), group.documents.begin(), group.documents.end());
        out.groups.push_back(std::move(g));
    }
    return out;
}

std::uint64_t fingerprint(const Corpus& corpus) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const void* data, std::size_t len) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= bytes[i];
            h *= 0x100000001b3ULL;
        }
    };
    if (corpus.vocabulary)
        for (const auto& w : corpus.vocabulary->words()) {
            feed(w.data(), w.size());
            feed("\n", 1);
        }
    for (const auto& g : corpus.groups) {
        feed(g.name.data(), g.name.size());
        for (const auto& doc : g.documents) {
            std::uint64_t len = doc.size();
            feed(&len, sizeof len);
            feed(doc.data(), doc.size() * sizeof(WordId));
        }
    }
    return h;
}

}  // namespace spdp
