#include "spdp/config.hpp"

#include <fstream>
#include <sstream>

#include "spdp/errors.hpp"
#include "spdp/text_io.hpp"

namespace spdp {

namespace {

template <typename T>
T parse_value(std::string_view key, std::string_view value) {
    auto v = text::parse_number<T>(value);
    if (!v) throw ConfigError("bad value '" + std::string(value) + "' for '" + std::string(key) + "'");
    return *v;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace

void RunConfig::validate() const {
    if (corpora.empty()) throw ConfigError("at least one --corpus name=path is required");
    if (topics == 0) throw ConfigError("topics must be positive");
    if (!(alpha > 0.0) || !(beta > 0.0)) throw ConfigError("alpha and beta must be positive");
    if (!(discount >= 0.0 && discount < 1.0)) throw ConfigError("discount must lie in [0, 1)");
    if (!(concentration > 0.0)) throw ConfigError("concentration must be positive");
    if (workers == 0 || devices == 0) throw ConfigError("workers and devices must be positive");
    if (wave_budget == 0) throw ConfigError("wave budget must be positive");
    if (duplicate == 0) throw ConfigError("duplicate must be at least 1");
    if (!(holdout >= 0.0 && holdout < 1.0)) throw ConfigError("holdout must lie in [0, 1)");
    if (mode == SamplerMode::parallel && transform)
        throw ConfigError("parallel mode requires the identity transform");
    if (mode == SamplerMode::parallel && schedule != ScheduleOrder::corpus)
        throw ConfigError("schedule applies to sequential mode only");
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view value) {
    value = trim(value);
    if (key == "corpus") {
        const auto eq = value.find('=');
        if (eq == std::string_view::npos || eq == 0 || eq + 1 == value.size())
            throw ConfigError("corpus must be given as name=path, got '" + std::string(value) + "'");
        const auto name = value.substr(0, eq);
        if (name.find_first_of(" \t") != std::string_view::npos)
            throw ConfigError("group name '" + std::string(name) + "' contains whitespace");
        c.corpora.push_back({std::string(name), std::string(value.substr(eq + 1))});
    } else if (key == "stopwords") {
        c.stopwords = value.empty() ? std::nullopt : std::optional<std::filesystem::path>(std::string(value));
    } else if (key == "transform") {
        c.transform = value.empty() ? std::nullopt : std::optional<std::filesystem::path>(std::string(value));
    } else if (key == "topics") {
        c.topics = parse_value<std::size_t>(key, value);
    } else if (key == "iterations") {
        c.iterations = parse_value<std::uint64_t>(key, value);
    } else if (key == "eval_every") {
        c.eval_every = parse_value<std::uint64_t>(key, value);
    } else if (key == "snapshot_every") {
        c.snapshot_every = parse_value<std::uint64_t>(key, value);
    } else if (key == "alpha") {
        c.alpha = parse_value<double>(key, value);
    } else if (key == "beta") {
        c.beta = parse_value<double>(key, value);
    } else if (key == "discount") {
        c.discount = parse_value<double>(key, value);
    } else if (key == "concentration") {
        c.concentration = parse_value<double>(key, value);
    } else if (key == "mode") {
        if (value == "sequential")
            c.mode = SamplerMode::sequential;
        else if (value == "parallel")
            c.mode = SamplerMode::parallel;
        else
            throw ConfigError("mode must be 'sequential' or 'parallel', got '" + std::string(value) + "'");
    } else if (key == "schedule") {
        if (value == "corpus")
            c.schedule = ScheduleOrder::corpus;
        else if (value == "reordered")
            c.schedule = ScheduleOrder::reordered;
        else
            throw ConfigError("schedule must be 'corpus' or 'reordered', got '" + std::string(value) + "'");
    } else if (key == "workers") {
        c.workers = parse_value<unsigned>(key, value);
    } else if (key == "devices") {
        c.devices = parse_value<unsigned>(key, value);
    } else if (key == "wave_budget") {
        c.wave_budget = parse_value<std::size_t>(key, value);
    } else if (key == "merge_mode") {
        c.merge_mode = parse_merge_mode(std::string(value));
    } else if (key == "duplicate") {
        c.duplicate = parse_value<unsigned>(key, value);
    } else if (key == "holdout") {
        c.holdout = parse_value<double>(key, value);
    } else if (key == "seed") {
        c.seed = parse_value<std::uint64_t>(key, value);
    } else if (key == "out") {
        if (value.empty()) throw ConfigError("out must not be empty");
        c.out = std::string(value);
    } else if (key == "fold_in_iterations") {
        c.fold_in_iterations = parse_value<unsigned>(key, value);
    } else {
        throw ConfigError("unknown setting '" + std::string(key) + "'");
    }
}

std::string config_text(const RunConfig& c) {
    std::ostringstream out;
    for (const auto& g : c.corpora) out << "corpus=" << g.name << "=" << g.path.string() << "\n";
    out << "stopwords=" << (c.stopwords ? c.stopwords->string() : "") << "\n";
    out << "transform=" << (c.transform ? c.transform->string() : "") << "\n";
    out << "topics=" << c.topics << "\n";
    out << "iterations=" << c.iterations << "\n";
    out << "eval_every=" << c.eval_every << "\n";
    out << "snapshot_every=" << c.snapshot_every << "\n";
    out << "alpha=" << text::format_double(c.alpha) << "\n";
    out << "beta=" << text::format_double(c.beta) << "\n";
    out << "discount=" << text::format_double(c.discount) << "\n";
    out << "concentration=" << text::format_double(c.concentration) << "\n";
    out << "mode=" << (c.mode == SamplerMode::sequential ? "sequential" : "parallel") << "\n";
    out << "schedule=" << (c.schedule == ScheduleOrder::corpus ? "corpus" : "reordered") << "\n";
    out << "workers=" << c.workers << "\n";
    out << "devices=" << c.devices << "\n";
    out << "wave_budget=" << c.wave_budget << "\n";
    out << "merge_mode=" << to_string(c.merge_mode) << "\n";
    out << "duplicate=" << c.duplicate << "\n";
    out << "holdout=" << text::format_double(c.holdout) << "\n";
    out << "seed=" << c.seed << "\n";
    out << "out=" << c.out.string() << "\n";
    out << "fold_in_iterations=" << c.fold_in_iterations << "\n";
    return out.str();
}

RunConfig parse_config(std::string_view text) {
    RunConfig c;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
        try {
            apply_setting(c, trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace spdp
