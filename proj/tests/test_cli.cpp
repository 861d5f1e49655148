#include "gaitformer/cli.hpp"
#include "gaitformer/data/synth.hpp"
#include "gaitformer/errors.hpp"
#include "gaitformer/model.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gaitformer;
using namespace gaitformer::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "gaitformer");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "gaitformer_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::size_t count_lines_with(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) n += line.find(needle) != std::string::npos;
    return n;
}

} // namespace

TEST(ConfigText, ParsesPairsAndComments) {
    const auto pairs = parse_config_text("# header\nseed = 7\n\n  variant=B   # inline\n", "cfg");
    ASSERT_EQ(pairs.size(), 2u);
    EXPECT_EQ(pairs[0], (std::pair<std::string, std::string>{"seed", "7"}));
    EXPECT_EQ(pairs[1].second, "B");
}

TEST(ConfigText, ErrorsNameTheLine) {
    try {
        parse_config_text("seed = 1\nseed = 2\n", "run.cfg");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("run.cfg:2"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse_config_text("no equals sign\n", "x"), ConfigError);
}

TEST(ConfigText, SettingValidation) {
    RunConfig c;
    EXPECT_THROW(apply_setting(c, "colour", "blue"), ConfigError);
    EXPECT_THROW(apply_setting(c, "variant", "X"), ConfigError);
    EXPECT_THROW(apply_setting(c, "k", "1"), ConfigError);
    EXPECT_THROW(apply_setting(c, "validation_fraction", "1.0"), ConfigError);
    EXPECT_THROW(apply_setting(c, "seed", "abc"), ConfigError);
    EXPECT_THROW(apply_setting(c, "early_stopping", "yes"), ConfigError);
    apply_setting(c, "learning_rate", "0.0005");
    EXPECT_EQ(c.train.learning_rate, 0.0005);
}

TEST(ConfigText, ResolvedTextReloadsExactly) {
    RunConfig c;
    c.command = "train";
    apply_setting(c, "learning_rate", "0.1");
    apply_setting(c, "synth_separation", "0.3333333333333333");
    apply_setting(c, "variant", "C");
    apply_setting(c, "seed", "18446744073709551615");
    const auto text = resolved_config_text(c);
    RunConfig back;
    back.command = "train";
    for (const auto& [k, v] : parse_config_text(text, "resolved")) apply_setting(back, k, v);
    EXPECT_EQ(resolved_config_text(back), text);
    EXPECT_EQ(back.train.learning_rate, 0.1);
    EXPECT_EQ(back.seed, 18446744073709551615ull);
}

TEST(Cli, UnknownVariantIsUsageError) {
    const auto r = run_cli({"train", "--synthetic", "--variant", "X"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("{full,B,C}"), std::string::npos) << r.err;
}

TEST(Cli, TooFewFoldsIsUsageError) { EXPECT_EQ(run_cli({"crossval", "--synthetic", "--k", "1"}).code, 2); }

TEST(Cli, UnknownFlagIsUsageError) { EXPECT_EQ(run_cli({"train", "--bogus"}).code, 2); }

TEST(Cli, MissingDataDirectoryNamesPath) {
    const auto out = scratch("missing");
    const auto r = run_cli({"train", "--data", "/nonexistent/gait_data", "--out", out.string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("/nonexistent/gait_data"), std::string::npos) << r.err;
}

TEST(Cli, ConfigFileAndFlagsCombine) {
    const auto dir = scratch("config");
    std::ofstream(dir / "run.cfg") << "variant = B\nsynth_subjects_per_class = 3\n";
    const auto r = run_cli({"synth", "--config", (dir / "run.cfg").string(), "--duration", "2", "--out",
                            (dir / "walks").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream in(dir / "walks" / "config.resolved");
    std::stringstream text;
    text << in.rdbuf();
    EXPECT_NE(text.str().find("synth_subjects_per_class = 3"), std::string::npos) << text.str();
    EXPECT_NE(text.str().find("synth_duration_s = 2"), std::string::npos) << text.str();
}

TEST(Cli, SynthThenDatasetStats) {
    const auto dir = scratch("stats");
    ASSERT_EQ(run_cli({"synth", "--subjects-per-class", "2", "--duration", "10", "--out", dir.string()}).code, 0);
    const auto r = run_cli({"dataset-stats", "--data", dir.string(), "--no-reference-check"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("walks"), std::string::npos);
    // 4 walks of 1000 samples -> 19 segments each.
    EXPECT_NE(r.out.find("76"), std::string::npos) << r.out;
    const auto checked = run_cli({"dataset-stats", "--data", dir.string()});
    EXPECT_EQ(checked.code, 1);
    EXPECT_NE(checked.out.find("DEVIATION"), std::string::npos);
}

TEST(Cli, PredictWithZeroModel) {
    const auto dir = scratch("predict");
    data::SynthOptions o;
    o.subjects_per_class = 1;
    o.duration_s = 12.34;
    const auto walk = data::synth_dataset(o)[0];
    const auto walk_path = data::write_walk_file(walk, dir);
    model::GaitformerModel net(model::Variant::full, 0);
    net.fill_parameters(0.0);
    model::save_model(net, dir / "zero.gfm");

    const auto r = run_cli({"predict", "--model", (dir / "zero.gfm").string(), "--walk", walk_path.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::size_t expected = (1234 - 100) / 50 + 1;
    EXPECT_NE(r.out.find("segments=" + std::to_string(expected) + "\n"), std::string::npos) << r.out;
    EXPECT_EQ(count_lines_with(r.out, "probability=0.500000 vote=1"), expected);
    EXPECT_NE(r.out.find("mean_probability=0.500000"), std::string::npos);
    EXPECT_NE(r.out.find("label=1 (parkinson)"), std::string::npos);
}

TEST(Cli, PredictRejectsCorruptModel) {
    const auto dir = scratch("corrupt");
    std::ofstream(dir / "bad.gfm") << "not a model";
    data::SynthOptions o;
    o.subjects_per_class = 1;
    o.duration_s = 2;
    const auto walk_path = data::write_walk_file(data::synth_dataset(o)[0], dir);
    const auto r = run_cli({"predict", "--model", (dir / "bad.gfm").string(), "--walk", walk_path.string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_FALSE(r.err.empty());
    EXPECT_EQ(run_cli({"predict", "--walk", walk_path.string()}).code, 2);
}
