// Runs the acceptance criteria and prints one PASS/FAIL/SKIP line per
// criterion. Arguments restrict the run to the listed criterion numbers.
#include "gaitformer/autodiff/ops.hpp"
#include "gaitformer/cli.hpp"
#include "gaitformer/data/folds.hpp"
#include "gaitformer/data/normalization.hpp"
#include "gaitformer/data/segmentation.hpp"
#include "gaitformer/data/synth.hpp"
#include "gaitformer/errors.hpp"
#include "gaitformer/eval.hpp"
#include "gaitformer/layers.hpp"
#include "gaitformer/model.hpp"
#include "gaitformer/random.hpp"
#include "gaitformer/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace gaitformer;
namespace fs = std::filesystem;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
    Status status;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c);
    return buf;
}

ad::Tensor random_batch(std::size_t n, std::size_t len, Rng& rng) {
    std::vector<double> v(n * model::kSensors * len);
    for (auto& e : v) e = rng.uniform(-3.0, 3.0);
    return ad::Tensor::from({n, model::kSensors, len}, std::move(v));
}

// Normalized segments of synthetic walks, normalization fit on all walks.
std::vector<data::Segment> synthetic_segments(const data::SynthOptions& options, model::Variant variant) {
    const auto walks = data::synth_dataset(options);
    const auto stats = data::fit_normalization(walks);
    std::vector<data::WalkRecord> normalized;
    for (const auto& w : walks) normalized.push_back(data::apply_normalization(w, stats));
    const auto g = model::segment_geometry(variant);
    return data::segment_walks(normalized, g.window, g.stride);
}

train::TrainConfig desk_config() {
    train::TrainConfig c;
    c.max_epochs = 30;
    c.early_stop_patience = 5;
    return c;
}

data::SynthOptions desk_data(double separation) {
    data::SynthOptions o;
    o.subjects_per_class = 8;
    o.duration_s = 30;
    o.separation = separation;
    o.seed = 2024;
    return o;
}

eval::EvalReport desk_crossval(const std::vector<data::WalkRecord>& walks, model::Variant variant) {
    eval::CrossValOptions opt;
    opt.variant = variant;
    opt.train = desk_config();
    opt.k = 3;
    opt.seed = 1;
    return eval::cross_validate(walks, opt);
}

Outcome criterion_gradients() {
    const auto start = Clock::now();
    const auto cases = cli::gradcheck_suite(0, 1e-4);
    const double elapsed = seconds_since(start);
    double worst = 0.0;
    std::string failed;
    for (const auto& c : cases) {
        worst = std::max(worst, c.result.max_relative_error);
        if (!c.result.passed()) failed += " " + c.name;
    }
    const bool ok = failed.empty() && elapsed < 120.0;
    return {ok ? Status::pass : Status::fail,
            fmt("max_rel_error=%.3g over %.0f cases in %.1f s (limit 120 s)", worst,
                static_cast<double>(cases.size()), elapsed) +
                (failed.empty() ? "" : "; failing:" + failed)};
}

Outcome criterion_identity() {
    Rng rng(3);
    bool ok = true;
    for (const auto variant : {model::Variant::full, model::Variant::B, model::Variant::C}) {
        model::GaitformerModel net(variant, 0);
        net.fill_parameters(0.0);
        const auto p = net.forward(random_batch(7, net.segment_length(), rng), false, rng);
        for (std::size_t i = 0; i < p.size(); ++i) ok = ok && p.at(i) == 0.5;
    }
    std::size_t blocks = 0;
    for (const auto& g : {layers::EncoderGeometry{100}, layers::EncoderGeometry{180},
                          layers::EncoderGeometry{18, 50, 2, 25}}) {
        layers::EncoderBlock block(g, rng);
        ad::ParamList params;
        block.collect_parameters("block", params);
        for (auto& p : params) {
            for (auto& v : p.tensor.values()) v = 0.0;
        }
        std::vector<double> v(4 * g.seq_len * g.token_dim);
        for (auto& e : v) e = rng.uniform(-5.0, 5.0);
        const auto x = ad::Tensor::from({4, g.seq_len, g.token_dim}, v);
        for (const bool training : {false, true}) {
            const auto y = block.forward(x, training, rng);
            for (std::size_t i = 0; i < x.size(); ++i) ok = ok && y.at(i) == x.at(i);
        }
        ++blocks;
    }
    return {ok ? Status::pass : Status::fail,
            "zero models output exactly 0.5 for all variants; " + std::to_string(blocks) +
                " zero-weight encoder geometries map x to x exactly"};
}

Outcome criterion_overfit() {
    const auto start = Clock::now();
    data::SynthOptions o;
    o.subjects_per_class = 10;
    o.duration_s = 1.0;
    o.separation = 1.0;
    o.seed = 3;
    const auto segs = synthetic_segments(o, model::Variant::full);
    if (segs.size() != 20) {
        return {Status::fail, "expected 20 segments, generated " + std::to_string(segs.size())};
    }
    model::GaitformerModel net(model::Variant::full, 3);
    train::TrainConfig c;
    c.max_epochs = 500;
    c.early_stop_patience = 500;
    c.early_stopping = false;
    c.batch_size = 20;
    std::size_t reached = 0;
    train::TrainHooks hooks;
    hooks.on_epoch = [&](const train::EpochRecord& r, const model::GaitformerModel&) {
        if (r.validation_accuracy == 1.0) {
            reached = r.epoch;
            return false;
        }
        return true;
    };
    train::train(net, segs, segs, c, hooks);
    const double elapsed = seconds_since(start);
    const bool ok = reached > 0 && elapsed < 180.0;
    return {ok ? Status::pass : Status::fail,
            (reached ? "100% segment accuracy at epoch " + std::to_string(reached)
                     : std::string("never reached 100% segment accuracy in 500 epochs")) +
                fmt(" in %.1f s (limit 180 s)", elapsed)};
}

struct DeskRun {
    std::optional<eval::EvalReport> full;
    double full_seconds = 0.0;
};

Outcome criterion_desk(DeskRun& desk) {
    const auto start = Clock::now();
    const auto walks = data::synth_dataset(desk_data(1.0));
    desk.full = desk_crossval(walks, model::Variant::full);
    desk.full_seconds = seconds_since(start);
    const double acc = desk.full->accuracy.mean;

    // Null control: identical classes, subject labels permuted.
    auto null_walks = data::synth_dataset(desk_data(0.0));
    std::vector<data::Group> groups;
    for (const auto& w : null_walks) groups.push_back(w.group);
    Rng rng(derive_seed(2024, "acceptance.permute"));
    rng.shuffle(groups.begin(), groups.end());
    for (std::size_t i = 0; i < null_walks.size(); ++i) null_walks[i].group = groups[i];
    const auto null_report = desk_crossval(null_walks, model::Variant::full);
    const double null_mean = null_report.accuracy.mean;
    const double null_sd = null_report.accuracy.sd;
    const double elapsed = seconds_since(start);

    const bool ok = acc >= 0.9 && std::abs(null_mean - 0.5) <= 3.0 * null_sd + 1e-12 && elapsed < 900.0;
    return {ok ? Status::pass : Status::fail,
            fmt("walk Acc %.3f (need >= 0.90); ", acc) +
                fmt("null Acc %.3f +- %.3f (need |mean - 0.5| <= 3 SD); ", null_mean, null_sd) +
                fmt("%.0f s (limit 900 s)", elapsed)};
}

Outcome criterion_dataset() {
    const char* dir = std::getenv("GAITFORMER_DATA");
    if (dir == nullptr || !fs::is_directory(dir)) {
        return {Status::skip, "set GAITFORMER_DATA to the gait dataset directory to check its counts"};
    }
    std::string a0 = "gaitformer", a1 = "dataset-stats", a2 = "--data", a3 = dir;
    char* argv[] = {a0.data(), a1.data(), a2.data(), a3.data()};
    std::ostringstream out, err;
    const int code = cli::run(4, argv, out, err);
    std::cout << out.str();
    return {code == 0 ? Status::pass : Status::fail,
            code == 0 ? "all counts match the reference" : "count deviation or load failure: " + err.str()};
}

Outcome criterion_metrics() {
    Rng rng(6);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = rng.below(60);
        eval::ConfusionCounts counts;
        std::size_t tp = 0, fn = 0, tn = 0, fp = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const int truth = static_cast<int>(rng.below(2));
            const int pred = static_cast<int>(rng.below(2));
            counts.add(truth, pred);
            if (truth == 1) {
                pred == 1 ? ++tp : ++fn;
            } else {
                pred == 0 ? ++tn : ++fp;
            }
        }
        const auto m = eval::metrics(counts);
        const auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
            if (den == 0) return std::nullopt;
            return static_cast<double>(num) / static_cast<double>(den);
        };
        bool same = counts == eval::ConfusionCounts{tp, fn, tn, fp} && m.sensitivity == ratio(tp, tp + fn) &&
                    m.specificity == ratio(tn, tn + fp) && m.accuracy == ratio(tp + tn, n);
        if (n > 0) {
            // Integer identity: Acc * total rounds to exactly tp + tn.
            same = same && std::llround(*m.accuracy * static_cast<double>(n)) == static_cast<long long>(tp + tn);
        }
        mismatches += static_cast<std::size_t>(!same);
    }
    return {mismatches == 0 ? Status::pass : Status::fail,
            std::to_string(1000 - mismatches) + "/1000 prediction sets match brute-force recounts"};
}

Outcome criterion_determinism() {
    const auto base = fs::temp_directory_path() / "gaitformer_acceptance";
    std::vector<std::string> reports;
    for (const char* run_name : {"a", "b"}) {
        const auto out_dir = base / run_name;
        fs::remove_all(out_dir);
        std::vector<std::string> args = {"gaitformer", "crossval", "--synthetic", "--subjects-per-class", "3",
                                         "--duration", "4", "--variant", "C", "--k", "3", "--max-epochs", "3",
                                         "--patience", "3", "--seed", "9", "--out", out_dir.string()};
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        std::ostringstream out, err;
        if (cli::run(static_cast<int>(argv.size()), argv.data(), out, err) != 0) {
            return {Status::fail, "crossval run failed: " + err.str()};
        }
        std::ifstream in(out_dir / "report.json", std::ios::binary);
        std::stringstream text;
        text << in.rdbuf();
        reports.push_back(text.str());
    }
    const bool reports_equal = !reports[0].empty() && reports[0] == reports[1];

    bool models_equal = true;
    Rng rng(7);
    for (const auto variant : {model::Variant::full, model::Variant::B, model::Variant::C}) {
        model::GaitformerModel net(variant, rng.next());
        const auto path = base / ("model_" + std::string(model::variant_name(variant)) + ".gfm");
        model::save_model(net, path);
        const auto back = model::load_model(path);
        models_equal = models_equal && back.snapshot() == net.snapshot() && back.variant() == net.variant();
    }
    return {reports_equal && models_equal ? Status::pass : Status::fail,
            std::string(reports_equal ? "crossval reports byte-identical" : "crossval reports differ") + "; " +
                (models_equal ? "save/load bit-exact for all variants" : "save/load changed parameters")};
}

Outcome criterion_segmentation() {
    Rng rng(8);
    std::size_t count_errors = 0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t window = 1 + rng.below(150);
        const std::size_t stride = 1 + rng.below(window);
        const std::size_t total = rng.below(1500);
        data::WalkRecord w;
        w.subject_id = "GaPt01";
        w.walk_index = 1;
        w.channels.assign(data::kChannelCount, std::vector<double>(total, 1.0));
        std::size_t enumerated = 0;
        for (std::size_t s = 0; s + window <= total; s += stride) ++enumerated;
        const auto segs = data::segment_walk(w, window, stride);
        count_errors += static_cast<std::size_t>(segs.size() != enumerated ||
                                                 data::segment_count(total, window, stride) != enumerated);
    }

    // Every fold plan: test, validation and training subjects are disjoint.
    std::size_t plans = 0, leaks = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        data::SynthOptions o;
        o.subjects_per_class = 4 + seed % 5;
        o.duration_s = 2;
        o.seed = seed;
        const auto walks = data::synth_dataset(o);
        const auto subjects = data::subjects_of(walks);
        const std::size_t k = 2 + seed % 3;
        const auto plan = data::build_folds(subjects, k, seed);
        for (std::size_t f = 0; f < k; ++f, ++plans) {
            const auto test_ids = plan.fold_subjects(f);
            const std::set<std::string> test_set(test_ids.begin(), test_ids.end());
            std::vector<data::SubjectInfo> rest;
            for (const auto& s : subjects) {
                if (!test_set.count(s.id)) rest.push_back(s);
            }
            const auto split = data::validation_split(rest, 0.1, seed + f);
            std::set<std::string> val_set, train_set;
            for (const auto& s : split.validation) val_set.insert(s.id);
            for (const auto& s : split.train) train_set.insert(s.id);
            std::vector<data::WalkRecord> test_w, val_w, train_w;
            for (const auto& w : walks) {
                (test_set.count(w.subject_id) ? test_w : val_set.count(w.subject_id) ? val_w : train_w).push_back(w);
            }
            const auto test = data::segment_walks(test_w, 100, 50);
            const auto val = data::segment_walks(val_w, 100, 50);
            const auto tr = data::segment_walks(train_w, 100, 50);
            leaks += data::leaked_subjects(tr, test).size() + data::leaked_subjects(val, test).size() +
                     data::leaked_subjects(tr, val).size();
        }
    }
    const bool ok = count_errors == 0 && leaks == 0;
    return {ok ? Status::pass : Status::fail,
            std::to_string(200 - count_errors) + "/200 segment counts match enumeration; " +
                std::to_string(leaks) + " leaked subjects over " + std::to_string(plans) + " fold splits"};
}

Outcome criterion_ablation(DeskRun& desk) {
    const auto start = Clock::now();
    const auto walks = data::synth_dataset(desk_data(1.0));
    if (!desk.full) desk.full = desk_crossval(walks, model::Variant::full);
    std::vector<std::pair<std::string, eval::EvalReport>> rows;
    rows.emplace_back("full", *desk.full);
    rows.emplace_back("B", desk_crossval(walks, model::Variant::B));
    rows.emplace_back("C", desk_crossval(walks, model::Variant::C));
    std::cout << eval::ablation_table(rows);
    return {Status::pass, fmt("reported only, not gated: Acc full %.3f, B %.3f, C %.3f", rows[0].second.accuracy.mean,
                              rows[1].second.accuracy.mean, rows[2].second.accuracy.mean) +
                              fmt(" (%.0f s)", seconds_since(start))};
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    DeskRun desk;
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"gradient correctness", criterion_gradients},
        {"identity and zero sanity", criterion_identity},
        {"overfit 20 segments", criterion_overfit},
        {"desk-scale cross-validation", [&] { return criterion_desk(desk); }},
        {"dataset counts", criterion_dataset},
        {"metrics oracle", criterion_metrics},
        {"determinism", criterion_determinism},
        {"segmentation and leakage oracle", criterion_segmentation},
        {"variant ablation", [&] { return criterion_ablation(desk); }},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int number = static_cast<int>(i + 1);
        if (!selected.empty() && !selected.count(number)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {Status::fail, std::string("threw: ") + e.what()};
        }
        const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
        std::cout << tag << " criterion " << number << " (" << criteria[i].first << "): " << o.detail << std::endl;
        failures += o.status == Status::fail;
    }
    return failures == 0 ? 0 : 1;
}
