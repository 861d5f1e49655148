#pragma once

#include "gaitformer/autodiff/grad_check.hpp"
#include "gaitformer/train.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gaitformer::cli {

// Everything a command needs. Config files use one `key = value` pair per
// line; `#` starts a comment; blank lines are ignored. Keys are the field
// names below.
struct RunConfig {
    std::string command;
    std::string data;
    bool synthetic = false;
    std::size_t synth_subjects_per_class = 8;
    double synth_duration_s = 30.0;
    double synth_separation = 1.0;
    std::string variant = "full";
    std::uint64_t seed = 0;
    std::size_t k = 10;
    double validation_fraction = 0.1;
    train::TrainConfig train;
    std::string out = "runs/latest";
    std::string model;
    std::string walk;
    bool expect_reference_counts = true;
};

// Ordered key/value pairs from config text. Throws ConfigError on malformed
// lines or duplicate keys, naming the line.
std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text,
                                                                   std::string_view source);

// Throws ConfigError for unknown keys or unparsable values.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

void apply_config_file(RunConfig& config, const std::filesystem::path& path);

// Every key with its value; doubles as %.17g so the text reloads exactly.
std::string resolved_config_text(const RunConfig& config);

struct GradCheckCase {
    std::string name;
    ad::GradCheckResult result;
};

// Finite-difference checks of a dense layer, both attention paths, both
// encoder-block kinds and the three model variants with dropout off.
std::vector<GradCheckCase> gradcheck_suite(std::uint64_t seed, double tolerance = 1e-4,
                                           std::ostream* log = nullptr);

// Entry point; returns the process exit status: 0 success, 1 runtime
// failure, 2 usage or configuration error.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace gaitformer::cli
