#include "gaitformer/cli.hpp"
#include "gaitformer/errors.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace gaitformer::cli {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key));
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key) + ", expected true or false");
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text, std::string_view source) {
    std::vector<std::pair<std::string, std::string>> out;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        const auto where = std::string(source) + ":" + std::to_string(line_no);
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(where + ": expected 'key = value'");
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) {
            throw ConfigError(where + ": missing key");
        }
        if (!seen.insert(key).second) {
            throw ConfigError(where + ": duplicate key '" + key + "'");
        }
        out.emplace_back(key, value);
    }
    return out;
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view value) {
    auto& t = c.train;
    if (key == "command") {
        if (!c.command.empty() && value != c.command) {
            throw ConfigError("config is for command '" + std::string(value) + "', running '" + c.command + "'");
        }
        c.command = value;
    } else if (key == "data") {
        c.data = value;
    } else if (key == "synthetic") {
        c.synthetic = parse_bool(key, value);
    } else if (key == "synth_subjects_per_class") {
        c.synth_subjects_per_class = parse_number<std::size_t>(key, value);
    } else if (key == "synth_duration_s") {
        c.synth_duration_s = parse_number<double>(key, value);
    } else if (key == "synth_separation") {
        c.synth_separation = parse_number<double>(key, value);
    } else if (key == "variant") {
        if (value != "full" && value != "B" && value != "C") {
            throw ConfigError("unknown model variant '" + std::string(value) + "', expected one of {full,B,C}");
        }
        c.variant = value;
    } else if (key == "seed") {
        c.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "k") {
        c.k = parse_number<std::size_t>(key, value);
        if (c.k < 2) {
            throw ConfigError("k must be at least 2, got " + std::string(value));
        }
    } else if (key == "validation_fraction") {
        c.validation_fraction = parse_number<double>(key, value);
        if (!(c.validation_fraction > 0.0 && c.validation_fraction < 1.0)) {
            throw ConfigError("validation_fraction must be in (0, 1)");
        }
    } else if (key == "learning_rate") {
        t.learning_rate = parse_number<double>(key, value);
    } else if (key == "batch_size") {
        t.batch_size = parse_number<std::size_t>(key, value);
    } else if (key == "max_epochs") {
        t.max_epochs = parse_number<std::size_t>(key, value);
    } else if (key == "early_stop_min_delta") {
        t.early_stop_min_delta = parse_number<double>(key, value);
    } else if (key == "early_stop_patience") {
        t.early_stop_patience = parse_number<std::size_t>(key, value);
    } else if (key == "early_stopping") {
        t.early_stopping = parse_bool(key, value);
    } else if (key == "dropout_enabled") {
        t.dropout_enabled = parse_bool(key, value);
    } else if (key == "out") {
        c.out = value;
    } else if (key == "model") {
        c.model = value;
    } else if (key == "walk") {
        c.walk = value;
    } else if (key == "expect_reference_counts") {
        c.expect_reference_counts = parse_bool(key, value);
    } else {
        throw ConfigError("unknown config key '" + std::string(key) + "'");
    }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    for (const auto& [key, value] : parse_config_text(buf.str(), path.string())) {
        try {
            apply_setting(config, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(path.string() + ": " + e.what());
        }
    }
}

std::string resolved_config_text(const RunConfig& c) {
    const auto b = [](bool v) { return std::string(v ? "true" : "false"); };
    const std::vector<std::pair<std::string, std::string>> rows = {
        {"command", c.command},
        {"data", c.data},
        {"synthetic", b(c.synthetic)},
        {"synth_subjects_per_class", std::to_string(c.synth_subjects_per_class)},
        {"synth_duration_s", format_double(c.synth_duration_s)},
        {"synth_separation", format_double(c.synth_separation)},
        {"variant", c.variant},
        {"seed", std::to_string(c.seed)},
        {"k", std::to_string(c.k)},
        {"validation_fraction", format_double(c.validation_fraction)},
        {"learning_rate", format_double(c.train.learning_rate)},
        {"batch_size", std::to_string(c.train.batch_size)},
        {"max_epochs", std::to_string(c.train.max_epochs)},
        {"early_stop_min_delta", format_double(c.train.early_stop_min_delta)},
        {"early_stop_patience", std::to_string(c.train.early_stop_patience)},
        {"early_stopping", b(c.train.early_stopping)},
        {"dropout_enabled", b(c.train.dropout_enabled)},
        {"out", c.out},
        {"model", c.model},
        {"walk", c.walk},
        {"expect_reference_counts", b(c.expect_reference_counts)},
    };
    std::string out;
    for (const auto& [k, v] : rows) {
        out += k + " = " + v + "\n";
    }
    return out;
}

} // namespace gaitformer::cli
