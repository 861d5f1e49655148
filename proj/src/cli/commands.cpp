#include "gaitformer/cli.hpp"
#include "gaitformer/data/folds.hpp"
#include "gaitformer/data/normalization.hpp"
#include "gaitformer/data/segmentation.hpp"
#include "gaitformer/data/synth.hpp"
#include "gaitformer/data/walk.hpp"
#include "gaitformer/errors.hpp"
#include "gaitformer/eval.hpp"
#include "gaitformer/model.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

namespace gaitformer::cli {

namespace fs = std::filesystem;

namespace {

// Writes everything to two streams.
class TeeBuf : public std::streambuf {
public:
    TeeBuf(std::streambuf* a, std::streambuf* b) : a_(a), b_(b) {}

protected:
    int overflow(int c) override {
        if (c == traits_type::eof()) return traits_type::not_eof(c);
        const bool ok = a_->sputc(static_cast<char>(c)) != traits_type::eof() &&
                        b_->sputc(static_cast<char>(c)) != traits_type::eof();
        return ok ? c : traits_type::eof();
    }
    int sync() override { return (a_->pubsync() == 0 && b_->pubsync() == 0) ? 0 : -1; }

private:
    std::streambuf* a_;
    std::streambuf* b_;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text)) {
        throw Error("cannot write " + path.string());
    }
}

void prepare_out(const RunConfig& c) {
    std::error_code ec;
    fs::create_directories(c.out, ec);
    if (ec) {
        throw Error("cannot create output directory " + c.out + ": " + ec.message());
    }
    write_text(fs::path(c.out) / "config.resolved", resolved_config_text(c));
}

// Resolves the data source into the config so the written config replays it.
void resolve_data_source(RunConfig& c) {
    if (c.synthetic || !c.data.empty()) return;
    if (const char* env = std::getenv("GAITFORMER_DATA"); env && *env) {
        c.data = env;
        return;
    }
    throw ConfigError("no data source: pass --data, set GAITFORMER_DATA, or use --synthetic");
}

std::vector<data::WalkRecord> load_walks(const RunConfig& c) {
    if (c.synthetic) {
        data::SynthOptions o;
        o.subjects_per_class = c.synth_subjects_per_class;
        o.duration_s = c.synth_duration_s;
        o.separation = c.synth_separation;
        o.seed = c.seed;
        return data::synth_dataset(o);
    }
    return data::load_walk_directory(c.data);
}

std::vector<data::Segment> prepare_segments(std::span<const data::WalkRecord> walks,
                                            const data::NormalizationStats& stats, model::Variant variant) {
    std::vector<data::WalkRecord> normalized;
    normalized.reserve(walks.size());
    for (const auto& w : walks) normalized.push_back(data::apply_normalization(w, stats));
    const auto g = model::segment_geometry(variant);
    return data::segment_walks(normalized, g.window, g.stride);
}

int cmd_train(RunConfig& c, std::ostream& out) {
    resolve_data_source(c);
    c.train.seed = c.seed;
    c.train.validate();
    prepare_out(c);
    const auto variant = model::parse_variant(c.variant);
    const auto walks = load_walks(c);
    const auto subjects = data::subjects_of(walks);
    const auto split = data::validation_split(subjects, c.validation_fraction, c.seed);
    std::set<std::string> validation_ids;
    for (const auto& s : split.validation) validation_ids.insert(s.id);
    std::vector<data::WalkRecord> train_walks;
    std::vector<data::WalkRecord> validation_walks;
    for (const auto& w : walks) {
        (validation_ids.count(w.subject_id) ? validation_walks : train_walks).push_back(w);
    }
    const auto stats = data::fit_normalization(walks);
    const auto train_segments = prepare_segments(train_walks, stats, variant);
    const auto validation_segments = prepare_segments(validation_walks, stats, variant);
    out << "train_segments=" << train_segments.size() << " validation_segments=" << validation_segments.size()
        << '\n';

    model::GaitformerModel net(variant, c.seed);
    net.set_normalization(stats);
    std::ofstream log_file(fs::path(c.out) / "train.log");
    TeeBuf tee(log_file.rdbuf(), out.rdbuf());
    std::ostream log(&tee);
    train::TrainHooks hooks;
    hooks.log = &log;
    const auto state = train::train(net, train_segments, validation_segments, c.train, hooks);
    const auto model_path = fs::path(c.out) / "model.gfm";
    model::save_model(net, model_path);
    char buf[160];
    std::snprintf(buf, sizeof buf, "best_epoch=%zu best_val_loss=%.6f epochs_run=%zu model=%s", state.best_epoch,
                  state.best_validation_loss, state.epochs_run, model_path.string().c_str());
    log << buf << '\n' << std::flush;
    return 0;
}

int cmd_crossval(RunConfig& c, std::ostream& out) {
    resolve_data_source(c);
    c.train.seed = c.seed;
    c.train.validate();
    prepare_out(c);
    const auto walks = load_walks(c);
    eval::CrossValOptions options;
    options.variant = model::parse_variant(c.variant);
    options.train = c.train;
    options.k = c.k;
    options.seed = c.seed;
    options.validation_fraction = c.validation_fraction;
    std::ofstream log_file(fs::path(c.out) / "crossval.log");
    TeeBuf tee(log_file.rdbuf(), out.rdbuf());
    std::ostream log(&tee);
    options.log = &log;
    const auto report = eval::cross_validate(walks, options);
    const auto table = eval::report_table(report);
    write_text(fs::path(c.out) / "report.txt", table);
    write_text(fs::path(c.out) / "report.json", eval::report_json(report));
    out << table;
    return 0;
}

int cmd_predict(RunConfig& c, std::ostream& out) {
    if (c.model.empty() || c.walk.empty()) {
        throw ConfigError("predict needs --model and --walk");
    }
    const auto net = model::load_model(c.model);
    auto walk = data::read_walk_file(c.walk);
    if (!net.normalization().empty()) {
        walk = data::apply_normalization(walk, net.normalization());
    }
    const auto g = model::segment_geometry(net.variant());
    const auto segments = data::segment_walk(walk, g.window, g.stride);
    if (segments.empty()) {
        throw DataError(c.walk + ": walk of " + std::to_string(walk.duration_samples()) +
                        " samples is shorter than one segment of " + std::to_string(g.window));
    }
    const auto probs = train::predict_probabilities(net, segments);
    std::vector<eval::SegmentResult> results;
    char buf[160];
    out << "walk=" << walk.walk_id() << " variant=" << model::variant_name(net.variant())
        << " segments=" << segments.size() << '\n';
    for (std::size_t i = 0; i < segments.size(); ++i) {
        results.push_back({probs[i], eval::segment_vote(probs[i])});
        std::snprintf(buf, sizeof buf, "segment=%zu start=%zu probability=%.6f vote=%d", i,
                      segments[i].start_sample, probs[i], results.back().vote);
        out << buf << '\n';
    }
    std::size_t positive = 0;
    double sum = 0.0;
    for (const auto& r : results) {
        positive += static_cast<std::size_t>(r.vote);
        sum += r.probability;
    }
    const int label = eval::majority_vote(results);
    std::snprintf(buf, sizeof buf, "votes positive=%zu negative=%zu mean_probability=%.6f", positive,
                  results.size() - positive, sum / static_cast<double>(results.size()));
    out << buf << '\n';
    out << "label=" << label << " (" << (label == 1 ? "parkinson" : "control") << ")\n";
    return 0;
}

int cmd_synth(RunConfig& c, std::ostream& out) {
    c.synthetic = true;
    prepare_out(c);
    const auto walks = load_walks(c);
    for (const auto& w : walks) {
        data::write_walk_file(w, c.out);
    }
    out << "wrote " << walks.size() << " walks to " << c.out << '\n';
    return 0;
}

int cmd_gradcheck(RunConfig& c, std::ostream& out) {
    const auto cases = gradcheck_suite(c.seed, 1e-4, &out);
    std::size_t failed = 0;
    for (const auto& k : cases) failed += static_cast<std::size_t>(!k.result.passed());
    out << (failed == 0 ? "gradcheck passed" : "gradcheck FAILED: " + std::to_string(failed) + " case(s)") << '\n';
    return failed == 0 ? 0 : 1;
}

int cmd_dataset_stats(RunConfig& c, std::ostream& out) {
    resolve_data_source(c);
    const auto walks = load_walks(c);
    std::size_t pd_walks = 0;
    std::size_t segments = 0;
    for (const auto& w : walks) {
        pd_walks += static_cast<std::size_t>(w.label());
        segments += data::segment_count(w.duration_samples(), 100, 50);
    }
    std::size_t pd_subjects = 0;
    const auto subjects = data::subjects_of(walks);
    for (const auto& s : subjects) pd_subjects += static_cast<std::size_t>(s.group == data::Group::parkinson);

    struct Row {
        const char* name;
        std::size_t value;
        std::size_t reference;
    };
    const Row rows[] = {
        {"walks", walks.size(), 306},
        {"parkinson_walks", pd_walks, 214},
        {"control_walks", walks.size() - pd_walks, 92},
        {"subjects", subjects.size(), 166},
        {"parkinson_subjects", pd_subjects, 93},
        {"control_subjects", subjects.size() - pd_subjects, 73},
        {"segments_w100_s50", segments, 64468},
    };
    std::size_t deviations = 0;
    char buf[160];
    for (const auto& r : rows) {
        const bool ok = r.value == r.reference;
        deviations += static_cast<std::size_t>(!ok);
        if (c.expect_reference_counts) {
            std::snprintf(buf, sizeof buf, "%-20s %8zu  reference=%zu%s", r.name, r.value, r.reference,
                          ok ? "" : "  DEVIATION");
        } else {
            std::snprintf(buf, sizeof buf, "%-20s %8zu", r.name, r.value);
        }
        out << buf << '\n';
    }
    return c.expect_reference_counts && deviations > 0 ? 1 : 0;
}

struct OptionSpec {
    const char* flag;
    const char* key;
    const char* help;
};

constexpr OptionSpec kDataOptions[] = {
    {"--data", "data", "Directory of walk files (fallback: GAITFORMER_DATA)"},
    {"--subjects-per-class", "synth_subjects_per_class", "Synthetic subjects per class"},
    {"--duration", "synth_duration_s", "Synthetic walk duration in seconds"},
    {"--separation", "synth_separation", "Synthetic class separation (0 = none)"},
};

constexpr OptionSpec kTrainOptions[] = {
    {"--variant", "variant", "Model variant: full, B or C"},
    {"--lr", "learning_rate", "Adam learning rate"},
    {"--batch-size", "batch_size", "Mini-batch size"},
    {"--max-epochs", "max_epochs", "Maximum epochs"},
    {"--patience", "early_stop_patience", "Early-stopping patience in epochs"},
    {"--min-delta", "early_stop_min_delta", "Minimum validation-loss drop that counts as improvement"},
    {"--validation-fraction", "validation_fraction", "Fraction of subjects held out for validation"},
};

} // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Parkinson's gait classification from VGRF signals with Transformer encoders", "gaitformer"};
    app.require_subcommand(1);

    std::map<std::string, std::string> values;
    std::vector<std::string> sets;
    std::string config_path;
    struct Bound {
        CLI::App* sub;
        CLI::Option* option;
        std::string key;
        std::string flag_value; // empty for value options
    };
    std::vector<Bound> bound;

    const auto add_value = [&](CLI::App* sub, const OptionSpec& spec) {
        auto* opt = sub->add_option(spec.flag, values[std::string(sub->get_name()) + "/" + spec.key], spec.help);
        bound.push_back({sub, opt, spec.key, ""});
    };
    const auto add_flag = [&](CLI::App* sub, const char* flag, const char* key, const char* value, const char* help) {
        const std::string description = help;
        bound.push_back({sub, sub->add_flag(flag, description), key, value});
    };
    const auto add_common = [&](CLI::App* sub, bool with_out) {
        sub->add_option("--config", config_path, "key = value config file; flags override it");
        sub->add_option("--set", sets, "Extra key=value setting (repeatable)");
        add_value(sub, {"--seed", "seed", "Run seed"});
        if (with_out) add_value(sub, {"--out", "out", "Output directory"});
    };

    auto* train_cmd = app.add_subcommand("train", "Train one model on a train/validation split");
    auto* crossval_cmd = app.add_subcommand("crossval", "Subject-level k-fold cross-validation");
    auto* predict_cmd = app.add_subcommand("predict", "Classify one walk file with a saved model");
    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic walk dataset");
    auto* gradcheck_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
    auto* stats_cmd = app.add_subcommand("dataset-stats", "Walk, subject and segment counts of a dataset");

    for (auto* sub : {train_cmd, crossval_cmd}) {
        add_common(sub, true);
        for (const auto& spec : kDataOptions) add_value(sub, spec);
        for (const auto& spec : kTrainOptions) add_value(sub, spec);
        add_flag(sub, "--synthetic", "synthetic", "true", "Use the synthetic generator instead of --data");
        add_flag(sub, "--no-early-stopping", "early_stopping", "false", "Run all max_epochs");
        add_flag(sub, "--no-dropout", "dropout_enabled", "false", "Disable dropout during training");
    }
    add_value(crossval_cmd, {"--k", "k", "Number of folds (>= 2)"});

    add_common(predict_cmd, false);
    add_value(predict_cmd, {"--model", "model", "Model file written by train"});
    add_value(predict_cmd, {"--walk", "walk", "Walk text file"});

    add_common(synth_cmd, true);
    for (const auto& spec : kDataOptions) {
        if (std::string_view(spec.key) != "data") add_value(synth_cmd, spec);
    }

    add_common(gradcheck_cmd, false);

    add_common(stats_cmd, false);
    for (const auto& spec : kDataOptions) add_value(stats_cmd, spec);
    add_flag(stats_cmd, "--synthetic", "synthetic", "true", "Use the synthetic generator instead of --data");
    add_flag(stats_cmd, "--no-reference-check", "expect_reference_counts", "false",
             "Print counts without comparing them to the reference dataset");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    CLI::App* chosen = app.get_subcommands().front();
    RunConfig config;
    config.command = chosen->get_name();
    try {
        if (!config_path.empty()) {
            apply_config_file(config, config_path);
        }
        for (const auto& b : bound) {
            if (b.sub != chosen || b.option->count() == 0) continue;
            apply_setting(config, b.key,
                          b.flag_value.empty() ? values[config.command + "/" + b.key] : b.flag_value);
        }
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) {
                throw ConfigError("--set expects key=value, got '" + s + "'");
            }
            apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (config.command == "train") return cmd_train(config, out);
        if (config.command == "crossval") return cmd_crossval(config, out);
        if (config.command == "predict") return cmd_predict(config, out);
        if (config.command == "synth") return cmd_synth(config, out);
        if (config.command == "gradcheck") return cmd_gradcheck(config, out);
        return cmd_dataset_stats(config, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace gaitformer::cli
