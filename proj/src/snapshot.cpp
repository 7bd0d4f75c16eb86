#include "spdp/snapshot.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "spdp/errors.hpp"
#include "spdp/text_io.hpp"

namespace spdp {

namespace {

constexpr std::string_view magic = "SPDP-SNAPSHOT 1";

template <typename Range>
std::string join_ints(const Range& values) {
    std::string out;
    bool first = true;
    for (auto v : values) {
        if (!first) out += ' ';
        out += std::to_string(v);
        first = false;
    }
    return out;
}

class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    std::optional<std::string_view> next() {
        if (pos_ >= text_.size()) return std::nullopt;
        auto end = text_.find('\n', pos_);
        if (end == std::string_view::npos) end = text_.size();
        auto line = text_.substr(pos_, end - pos_);
        pos_ = end + 1;
        ++line_;
        return line;
    }

    std::string_view line(const std::string& section) {
        auto l = next();
        if (!l) fail(section, "unexpected end of file");
        return *l;
    }

    void expect(const std::string& section) {
        auto l = next();
        if (!l || *l != section) fail(section, "section header missing");
    }

    [[noreturn]] void fail(const std::string& section, const std::string& what) const {
        throw IntegrityError("snapshot section " + section + " (line " + std::to_string(line_) + "): " + what);
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 0;
};

template <typename T>
T number(Reader& in, const std::string& section, std::string_view field) {
    auto v = text::parse_number<T>(field);
    if (!v) in.fail(section, "bad number '" + std::string(field) + "'");
    return *v;
}

template <typename T>
std::vector<T> numbers(Reader& in, const std::string& section, std::string_view line) {
    std::vector<T> out;
    for (auto f : text::split_fields(line)) out.push_back(number<T>(in, section, f));
    return out;
}

/// "key v1 v2 ..." header line.
std::vector<std::string_view> keyed(Reader& in, std::string_view key) {
    auto fields = text::split_fields(in.line("HEADER"));
    if (fields.empty() || fields[0] != key) in.fail("HEADER", "expected key '" + std::string(key) + "'");
    fields.erase(fields.begin());
    return fields;
}

template <typename T>
T header_value(Reader& in, std::string_view key) {
    auto f = keyed(in, key);
    if (f.size() != 1) in.fail("HEADER", "key '" + std::string(key) + "' needs one value");
    return number<T>(in, "HEADER", f[0]);
}

template <typename T>
std::vector<T> header_values(Reader& in, std::string_view key, std::size_t expected) {
    std::vector<T> out;
    for (auto f : keyed(in, key)) out.push_back(number<T>(in, "HEADER", f));
    if (out.size() != expected)
        in.fail("HEADER", "key '" + std::string(key) + "' needs " + std::to_string(expected) + " values");
    return out;
}

}  // namespace

std::string snapshot_text(const Snapshot& snap) {
    const auto& s = snap.state;
    const auto& h = snap.hyper;
    std::ostringstream out;
    out << magic << "\nHEADER\n";
    out << "groups " << s.num_groups << "\ntopics " << s.num_topics << "\nvocab " << s.vocab_size << "\n";
    out << "documents " << s.num_documents() << "\npositions " << s.num_positions() << "\n";
    out << "fingerprint " << fingerprint(snap.corpus) << "\n";
    out << "iteration " << snap.iteration << "\nseed " << snap.seed << "\n";
    out << "transform " << (snap.transform.is_identity() ? "identity" : "sparse") << "\n";
    for (std::size_t i = 0; i < h.alpha.size(); ++i) out << "alpha " << text::join_doubles(h.alpha[i]) << "\n";
    out << "beta " << text::join_doubles(h.beta) << "\n";
    out << "discount " << text::join_doubles(h.discount) << "\n";
    out << "concentration " << text::join_doubles(h.concentration) << "\n";

    out << "VOCAB\n";
    for (const auto& w : snap.corpus.vocabulary->words()) out << w << "\n";
    out << "GROUPS\n";
    for (const auto& g : snap.corpus.groups) out << g.documents.size() << " " << g.name << "\n";
    out << "DOCS\n";
    for (const auto& g : snap.corpus.groups)
        for (const auto& d : g.documents) out << join_ints(d) << "\n";

    out << "Z\n";
    for (std::size_t d = 0; d < s.num_documents(); ++d)
        out << join_ints(std::span<const std::uint32_t>(s.z.data() + s.doc_begin[d], s.doc_length(d))) << "\n";
    out << "R\n";
    for (std::size_t d = 0; d < s.num_documents(); ++d) {
        for (std::size_t p = s.doc_begin[d]; p < s.doc_begin[d + 1]; ++p) out << (s.r[p] ? '1' : '0');
        out << "\n";
    }
    out << "VLISTS\n";
    std::vector<std::size_t> cells;
    for (const auto& [c, list] : s.tables) cells.push_back(c);
    std::sort(cells.begin(), cells.end());
    const std::size_t V = s.vocab_size, K = s.num_topics;
    for (auto c : cells)
        out << c / (V * K) << " " << (c / V) % K << " " << c % V << " " << join_ints(s.tables.at(c)) << "\n";
    if (!snap.transform.is_identity()) {
        out << "TRANSFORM\n";
        for (const auto& t : snap.transform.triplets())
            out << t.group << " " << t.row << " " << t.column << " " << text::format_double(t.value) << "\n";
    }
    out << "END\n";
    return out.str();
}

void save_snapshot(const Snapshot& snap, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    out << snapshot_text(snap);
    if (!out) throw LoadError("cannot write snapshot '" + path.string() + "'");
}

Snapshot parse_snapshot(std::string_view text) {
    Reader in(text);
    Snapshot snap;
    if (in.next() != magic) in.fail("HEADER", "not a version 1 snapshot");
    in.expect("HEADER");
    const auto I = header_value<std::size_t>(in, "groups");
    const auto K = header_value<std::size_t>(in, "topics");
    const auto V = header_value<std::size_t>(in, "vocab");
    const auto D = header_value<std::size_t>(in, "documents");
    const auto N = header_value<std::size_t>(in, "positions");
    const auto fp = header_value<std::uint64_t>(in, "fingerprint");
    snap.iteration = header_value<std::uint64_t>(in, "iteration");
    snap.seed = header_value<std::uint64_t>(in, "seed");
    const auto kind = keyed(in, "transform");
    if (kind.size() != 1 || (kind[0] != "identity" && kind[0] != "sparse"))
        in.fail("HEADER", "transform must be 'identity' or 'sparse'");
    const bool sparse = kind[0] == "sparse";
    if (K == 0) in.fail("HEADER", "topics must be positive");

    auto& h = snap.hyper;
    h.topics = K;
    for (std::size_t i = 0; i < I; ++i) h.alpha.push_back(header_values<double>(in, "alpha", K));
    h.beta = header_values<double>(in, "beta", V);
    h.discount = header_values<double>(in, "discount", K);
    h.concentration = header_values<double>(in, "concentration", K);
    try {
        h.validate(I, V);
    } catch (const ConfigError& e) {
        in.fail("HEADER", e.what());
    }

    in.expect("VOCAB");
    auto vocab = std::make_shared<Vocabulary>();
    for (std::size_t v = 0; v < V; ++v) {
        auto word = in.line("VOCAB");
        if (word.empty() || vocab->find(word)) in.fail("VOCAB", "empty or repeated word");
        vocab->intern(word);
    }
    snap.corpus.vocabulary = vocab;

    in.expect("GROUPS");
    std::vector<std::size_t> group_docs;
    std::size_t total_docs = 0;
    for (std::size_t i = 0; i < I; ++i) {
        auto line = in.line("GROUPS");
        const auto space = line.find(' ');
        if (space == std::string_view::npos || space + 1 >= line.size()) in.fail("GROUPS", "expected '<documents> <name>'");
        group_docs.push_back(number<std::size_t>(in, "GROUPS", line.substr(0, space)));
        total_docs += group_docs.back();
        snap.corpus.groups.push_back({std::string(line.substr(space + 1)), {}});
    }
    if (total_docs != D) in.fail("GROUPS", "document counts disagree with the header");

    in.expect("DOCS");
    for (std::size_t i = 0; i < I; ++i)
        for (std::size_t d = 0; d < group_docs[i]; ++d) {
            auto ids = numbers<WordId>(in, "DOCS", in.line("DOCS"));
            if (ids.empty()) in.fail("DOCS", "empty document");
            for (auto w : ids)
                if (w >= V) in.fail("DOCS", "word id out of range");
            snap.corpus.groups[i].documents.push_back(std::move(ids));
        }
    if (snap.corpus.token_count() != N) in.fail("DOCS", "token count disagrees with the header");
    if (fingerprint(snap.corpus) != fp) in.fail("DOCS", "corpus fingerprint mismatch");

    auto& s = snap.state;
    s = CountState(snap.corpus, K);
    in.expect("Z");
    for (std::size_t d = 0; d < D; ++d) {
        auto ks = numbers<std::uint32_t>(in, "Z", in.line("Z"));
        if (ks.size() != s.doc_length(d)) in.fail("Z", "document " + std::to_string(d) + " has the wrong length");
        for (std::size_t l = 0; l < ks.size(); ++l) {
            if (ks[l] >= K) in.fail("Z", "topic out of range");
            s.z[s.doc_begin[d] + l] = ks[l];
        }
    }
    in.expect("R");
    for (std::size_t d = 0; d < D; ++d) {
        auto bits = in.line("R");
        if (bits.size() != s.doc_length(d)) in.fail("R", "document " + std::to_string(d) + " has the wrong length");
        for (std::size_t l = 0; l < bits.size(); ++l) {
            if (bits[l] != '0' && bits[l] != '1') in.fail("R", "expected 0/1");
            s.r[s.doc_begin[d] + l] = bits[l] == '1';
        }
    }

    in.expect("VLISTS");
    std::optional<std::string_view> line;
    while ((line = in.next()) && *line != "TRANSFORM" && *line != "END") {
        auto f = numbers<std::size_t>(in, "VLISTS", *line);
        if (f.size() < 4 || f[0] >= I || f[1] >= K || f[2] >= V) in.fail("VLISTS", "bad cell line");
        const auto c = s.cell(f[0], f[1], static_cast<WordId>(f[2]));
        if (s.tables.count(c)) in.fail("VLISTS", "repeated cell");
        auto& list = s.tables[c];
        for (std::size_t j = 3; j < f.size(); ++j) {
            if (f[j] >= V) in.fail("VLISTS", "dish out of range");
            list.push_back(static_cast<WordId>(f[j]));
        }
    }
    if (!line) in.fail("END", "unexpected end of file");

    snap.transform = TransformMatrix::identity(I, V);
    if (*line == "TRANSFORM") {
        if (!sparse) in.fail("TRANSFORM", "identity snapshot has a transform section");
        std::vector<TransformTriplet> trip;
        while ((line = in.next()) && *line != "END") {
            auto f = text::split_fields(*line);
            if (f.size() != 4) in.fail("TRANSFORM", "expected 'group row column value'");
            trip.push_back({number<std::size_t>(in, "TRANSFORM", f[0]), number<WordId>(in, "TRANSFORM", f[1]),
                            number<WordId>(in, "TRANSFORM", f[2]), number<double>(in, "TRANSFORM", f[3])});
        }
        if (!line) in.fail("END", "unexpected end of file");
        try {
            snap.transform = TransformMatrix::from_triplets(I, V, trip);
        } catch (const ConfigError& e) {
            in.fail("TRANSFORM", e.what());
        }
    } else if (sparse) {
        in.fail("TRANSFORM", "section missing");
    }
    if (in.next()) in.fail("END", "trailing content");

    recount(s);
    auto problems = consistency_violations(s, &snap.transform);
    if (!problems.empty()) in.fail("Z/R/VLISTS", "inconsistent state: " + problems.front());
    return snap;
}

Snapshot load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot read snapshot '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_snapshot(buf.str());
}

}  // namespace spdp
