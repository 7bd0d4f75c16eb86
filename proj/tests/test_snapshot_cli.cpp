#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "spdp/commands.hpp"
#include "spdp/errors.hpp"
#include "spdp/sampler.hpp"
#include "support/fixtures.hpp"

using namespace spdp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("spdp-test-" + tag + "-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

Snapshot sampled_snapshot(bool sparse, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::vector<std::vector<std::vector<int>>> raw(2);
    for (auto& g : raw)
        for (int d = 0; d < 5; ++d) {
            std::vector<int> doc(1 + gen() % 9);
            for (int& w : doc) w = static_cast<int>(gen() % 6);
            g.push_back(doc);
        }
    Snapshot s;
    s.corpus = fixtures::make_corpus(raw, 6);
    s.hyper = fixtures::random_hyper(3, 2, 6, gen);
    s.transform = sparse ? fixtures::shifted_transform(2, 6, 0.3) : TransformMatrix::identity(2, 6);
    s.seed = seed;
    s.state = init_state(s.corpus, s.hyper, s.transform, seed);
    StirlingCache cache(s.hyper.discount, required_stirling_size(s.state));
    SamplerContext ctx(s.hyper, s.transform, cache);
    for (std::uint64_t it = 0; it < 5; ++it) gibbs_sweep(s.state, ctx, seed, it);
    s.iteration = 5;
    return s;
}

// Replaces the first line after `section` with `replacement`.
std::string corrupt_after(const std::string& text, const std::string& section, const std::string& replacement) {
    const auto at = text.find("\n" + section + "\n");
    REQUIRE(at != std::string::npos);
    const auto begin = at + section.size() + 2;
    const auto end = text.find('\n', begin);
    return text.substr(0, begin) + replacement + text.substr(end);
}

std::string integrity_message(const std::string& text) {
    try {
        parse_snapshot(text);
    } catch (const IntegrityError& e) {
        return e.what();
    }
    return "";
}

// Two small groups with distinct vocabularies so topics separate quickly.
struct TrainingFiles {
    TempDir dir{"train"};
    RunConfig config;
    TrainingFiles() {
        std::mt19937_64 gen(2);
        const std::vector<std::vector<std::string>> themes = {{"apple", "pear", "plum", "fig"},
                                                              {"river", "lake", "rain", "sea"},
                                                              {"code", "test", "build", "debug"}};
        for (const char* name : {"left", "right"}) {
            std::ofstream out(dir.path / (std::string(name) + ".txt"));
            for (int d = 0; d < 30; ++d) {
                const auto& a = themes[gen() % 3];
                const auto& b = themes[gen() % 3];
                for (int l = 0; l < 12; ++l) out << (gen() % 2 ? a : b)[gen() % 4] << " ";
                out << "\n";
            }
            config.corpora.push_back({name, dir.path / (std::string(name) + ".txt")});
        }
        config.topics = 3;
        config.iterations = 6;
        config.eval_every = 2;
        config.holdout = 0.2;
        config.seed = 17;
    }
    RunConfig with_out(const std::string& name) const {
        auto c = config;
        c.out = dir.path / name;
        return c;
    }
};

int run_cli(const std::string& args) {
    const int status = std::system((std::string(SPDP_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("snapshot save and load round-trips byte for byte") {
    for (bool sparse : {false, true})
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const auto snap = sampled_snapshot(sparse, seed);
            const auto text = snapshot_text(snap);
            const auto loaded = parse_snapshot(text);
            CHECK(snapshot_text(loaded) == text);
            CHECK(loaded.state == snap.state);
            CHECK(loaded.iteration == 5);
            CHECK(loaded.seed == seed);
            CHECK(loaded.transform.is_identity() == !sparse);
            CHECK(consistency_violations(loaded.state, &loaded.transform).empty());
        }
}

TEST_CASE("corrupt snapshots name the failing section") {
    const auto text = snapshot_text(sampled_snapshot(false, 4));
    CHECK(integrity_message("SPDP-SNAPSHOT 9\n" + text.substr(text.find('\n') + 1)).find("HEADER") !=
          std::string::npos);
    CHECK(integrity_message(corrupt_after(text, "Z", "99")).find("section Z") != std::string::npos);
    CHECK(integrity_message(corrupt_after(text, "R", "2")).find("section R") != std::string::npos);
    CHECK(integrity_message(corrupt_after(text, "VLISTS", "0 0 0")).find("section VLISTS") != std::string::npos);
    CHECK(integrity_message(text.substr(0, text.find("END"))).find("END") != std::string::npos);

    // valid syntax but a word id changed: the fingerprint no longer matches
    auto docs = corrupt_after(text, "DOCS", "0");
    CHECK(integrity_message(docs).find("DOCS") != std::string::npos);

    // flipping every table indicator of a document breaks the table lists
    const auto r_at = text.find("\nR\n") + 3;
    auto flipped = text;
    for (auto i = r_at; flipped[i] != '\n'; ++i) flipped[i] = flipped[i] == '0' ? '1' : '0';
    CHECK(!integrity_message(flipped).empty());
}

TEST_CASE("config round-trips and rejects bad settings") {
    RunConfig c;
    c.corpora = {{"red", "data/red state.txt"}, {"blue", "blue.txt"}};
    c.stopwords = "stop.txt";
    c.topics = 32;
    c.iterations = 17;
    c.alpha = 0.125;
    c.beta = 1.0 / 3.0;
    c.discount = 0.25;
    c.concentration = 7.5;
    c.mode = SamplerMode::parallel;
    c.workers = 8;
    c.devices = 4;
    c.wave_budget = 12345;
    c.merge_mode = MergeMode::delta;
    c.duplicate = 2;
    c.holdout = 0.05;
    c.seed = 987654321987654321ULL;
    c.out = "somewhere";
    c.fold_in_iterations = 3;
    CHECK(parse_config(config_text(c)) == c);
    CHECK(parse_config(config_text(RunConfig{})) == RunConfig{});
    CHECK(parse_config("# comment\n\ntopics = 5\n").topics == 5);

    auto message = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("topics=3\nbogus=1\n").find("line 2") != std::string::npos);
    CHECK(!message("topics=abc\n").empty());
    CHECK(!message("corpus=nopath\n").empty());
    CHECK(!message("mode=fast\n").empty());
    CHECK(!message("merge_mode=both\n").empty());
    CHECK(!message("no equals sign\n").empty());

    RunConfig v;
    CHECK_THROWS_AS(v.validate(), ConfigError);
    v.corpora = {{"a", "a.txt"}};
    CHECK_NOTHROW(v.validate());
    for (auto breaker : std::vector<std::function<void(RunConfig&)>>{
             [](RunConfig& x) { x.topics = 0; },
             [](RunConfig& x) { x.discount = 1.0; },
             [](RunConfig& x) { x.alpha = 0.0; },
             [](RunConfig& x) { x.concentration = -1.0; },
             [](RunConfig& x) { x.workers = 0; },
             [](RunConfig& x) { x.holdout = 1.0; },
             [](RunConfig& x) { x.duplicate = 0; },
             [](RunConfig& x) { x.mode = SamplerMode::parallel; x.transform = "p.txt"; },
             [](RunConfig& x) { x.mode = SamplerMode::parallel; x.schedule = ScheduleOrder::reordered; },
         }) {
        auto bad = v;
        breaker(bad);
        CHECK_THROWS_AS(bad.validate(), ConfigError);
    }
}

TEST_CASE("exit codes follow the error type") {
    CHECK(exit_code_for(ConfigError("x")) == 1);
    CHECK(exit_code_for(UnsupportedError("x")) == 1);
    CHECK(exit_code_for(LoadError("x")) == 2);
    CHECK(exit_code_for(DomainError("x")) == 2);
    CHECK(exit_code_for(IntegrityError("x")) == 3);
}

TEST_CASE("training is deterministic and writes its artifacts") {
    TrainingFiles files;
    std::ostringstream log, err;
    REQUIRE(cmd_train(files.with_out("a"), log, err) == 0);
    REQUIRE(cmd_train(files.with_out("b"), log, err) == 0);
    const auto a = files.dir.path / "a", b = files.dir.path / "b";
    CHECK(read_file(a / "final.snap") == read_file(b / "final.snap"));
    CHECK(read_file(a / "perplexity.csv") == read_file(b / "perplexity.csv"));
    CHECK(read_file(a / "estimate.txt") == read_file(b / "estimate.txt"));
    CHECK(fs::exists(a / "timings.csv"));

    std::istringstream csv(read_file(a / "perplexity.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "iteration,overall,group:left,group:right");
    std::vector<std::string> iterations;
    while (std::getline(csv, line)) iterations.push_back(line.substr(0, line.find(',')));
    CHECK(iterations == std::vector<std::string>{"1", "2", "4", "6"});

    const auto config = load_config(a / "config.txt");
    CHECK(config == files.with_out("a"));

    const auto snap = load_snapshot(a / "final.snap");
    CHECK(snap.iteration == 6);
    CHECK(consistency_violations(snap.state, &snap.transform).empty());
}

TEST_CASE("zero iterations write the initial state only") {
    TrainingFiles files;
    auto config = files.with_out("zero");
    config.iterations = 0;
    std::ostringstream log, err;
    REQUIRE(cmd_train(config, log, err) == 0);
    std::set<std::string> names;
    for (const auto& e : fs::directory_iterator(config.out)) names.insert(e.path().filename().string());
    CHECK(names == std::set<std::string>{"config.txt", "final.snap"});
    const auto snap = load_snapshot(config.out / "final.snap");
    CHECK(snap.iteration == 0);
    CHECK(snap.state == init_state(snap.corpus, snap.hyper, snap.transform, config.seed));
}

TEST_CASE("parallel run with one worker and one device equals the reordered sequential run") {
    TrainingFiles files;
    auto seq = files.with_out("seq");
    seq.schedule = ScheduleOrder::reordered;
    auto par = files.with_out("par");
    par.mode = SamplerMode::parallel;
    std::ostringstream log, err;
    for (auto merge : {MergeMode::shared, MergeMode::delta}) {
        par.merge_mode = merge;
        REQUIRE(cmd_train(seq, log, err) == 0);
        REQUIRE(cmd_train(par, log, err) == 0);
        CHECK(read_file(seq.out / "final.snap") == read_file(par.out / "final.snap"));
        CHECK(read_file(seq.out / "perplexity.csv") == read_file(par.out / "perplexity.csv"));
    }
}

TEST_CASE("topics and compare") {
    TrainingFiles files;
    std::ostringstream log, err;
    auto a = files.with_out("a");
    REQUIRE(cmd_train(a, log, err) == 0);
    const auto snap_path = a.out / "final.snap";

    std::ostringstream table;
    REQUIRE(cmd_topics(snap_path, 4, table, err) == 0);
    std::size_t rows = 0;
    std::istringstream lines(table.str());
    std::string line;
    while (std::getline(lines, line))
        if (line.rfind("group ", 0) == 0) ++rows;
    CHECK(rows == 2 * 3);
    CHECK(table.str().find("rank 1") != std::string::npos);

    const auto snap = load_snapshot(snap_path);
    const auto self = compare_snapshots(snap, snap);
    CHECK(self.permutation == std::vector<std::size_t>{0, 1, 2});
    for (std::size_t k = 0; k < 3; ++k) CHECK(self.distance(k, k) == doctest::Approx(0.0).epsilon(1e-7));

    std::ostringstream summary;
    CHECK(cmd_compare(snap_path, snap_path, files.dir.path / "heat.txt", summary, err) == 0);
    CHECK(summary.str().find("permutation 0 1 2") != std::string::npos);
    CHECK(read_file(files.dir.path / "heat.txt").rfind("3\n", 0) == 0);

    auto other_k = files.with_out("k4");
    other_k.topics = 4;
    REQUIRE(cmd_train(other_k, log, err) == 0);
    CHECK(cmd_compare(snap_path, other_k.out / "final.snap", files.dir.path / "h2.txt", summary, err) == 1);

    auto other_corpus = files.with_out("one-group");
    other_corpus.corpora.pop_back();
    REQUIRE(cmd_train(other_corpus, log, err) == 0);
    CHECK(cmd_compare(snap_path, other_corpus.out / "final.snap", files.dir.path / "h3.txt", summary, err) == 2);

    auto text = read_file(snap_path);
    write_file(files.dir.path / "bad.snap", corrupt_after(text, "Z", "7"));
    std::ostringstream bad_err;
    CHECK(cmd_topics(files.dir.path / "bad.snap", 5, table, bad_err) == 3);
    CHECK(bad_err.str().find("section Z") != std::string::npos);
}

TEST_CASE("evaluate maps new text into the snapshot vocabulary") {
    TrainingFiles files;
    std::ostringstream log, err;
    auto a = files.with_out("a");
    REQUIRE(cmd_train(a, log, err) == 0);
    const auto snap = load_snapshot(a.out / "final.snap");
    const auto text = corpus_from_lines({{"right", {"apple zebra river", "unicorn"}}});
    std::size_t dropped = 0;
    const auto mapped = map_to_snapshot(text, snap, dropped);
    CHECK(dropped == 2);
    CHECK(mapped.groups.size() == 2);
    CHECK(mapped.groups[0].documents.empty());
    REQUIRE(mapped.groups[1].documents.size() == 1);
    CHECK(mapped.groups[1].documents[0].size() == 2);
    const auto rep = evaluate_snapshot(snap, mapped, 5, 1);
    CHECK(rep.tokens == 2);
    CHECK(rep.overall > 1.0);
    CHECK(std::isnan(rep.per_group[0]));
    CHECK_THROWS_AS(map_to_snapshot(corpus_from_lines({{"nowhere", {"apple"}}}), snap, dropped), ConfigError);
}

TEST_CASE("transform files") {
    TempDir dir("transform");
    const auto corpus = corpus_from_lines({{"a", {"x y z"}}, {"b", {"x y"}}});
    write_file(dir.path / "p.txt", "# mix x and y in group b\nb x x 0.75\nb x y 0.25\nb y x 0.25\nb y y 0.75\n");
    const auto p = load_transform(dir.path / "p.txt", corpus);
    CHECK(!p.is_identity());
    CHECK(p.value(1, 0, 1) == doctest::Approx(0.25));
    CHECK(p.value(1, 2, 2) == doctest::Approx(1.0));
    CHECK(p.value(0, 0, 0) == doctest::Approx(1.0));
    write_file(dir.path / "skewed.txt", "b x x 0.75\nb x y 0.25\n");
    CHECK_THROWS(load_transform(dir.path / "skewed.txt", corpus));
    write_file(dir.path / "bad.txt", "c x x 1\n");
    CHECK_THROWS_AS(load_transform(dir.path / "bad.txt", corpus), LoadError);
}

TEST_CASE("command line front end") {
    TrainingFiles files;
    const auto& c = files.config;
    const std::string corpora = " --corpus left=" + c.corpora[0].path.string() + " --corpus right=" +
                                c.corpora[1].path.string();
    const auto out = files.dir.path / "cli";
    CHECK(run_cli("train" + corpora + " --topics 3 --iterations 4 --eval-every 2 --seed 17 --holdout 0.2 --out " +
                  out.string()) == 0);
    auto from_flags = c;
    from_flags.iterations = 4;
    from_flags.out = out;
    CHECK(load_config(out / "config.txt") == from_flags);

    // a config file plus an overriding flag
    write_file(files.dir.path / "run.cfg", config_text(from_flags));
    const auto out2 = files.dir.path / "cli2";
    CHECK(run_cli("train --config " + (files.dir.path / "run.cfg").string() + " --out " + out2.string()) == 0);
    CHECK(read_file(out / "final.snap") == read_file(out2 / "final.snap"));

    CHECK(run_cli("topics " + (out / "final.snap").string() + " -n 3") == 0);
    CHECK(run_cli("compare " + (out / "final.snap").string() + " " + (out2 / "final.snap").string() +
                  " --heatmap " + (files.dir.path / "h.txt").string()) == 0);
    CHECK(run_cli("evaluate " + (out / "final.snap").string() + corpora) == 0);
    CHECK(run_cli("") == 1);
    CHECK(run_cli("train --topics 3") == 1);
    CHECK(run_cli("train" + corpora + " --topics 0") == 1);
    CHECK(run_cli("train --corpus x=" + (files.dir.path / "missing.txt").string()) == 2);
    CHECK(run_cli("topics " + (files.dir.path / "missing.snap").string()) == 2);
}
