#include "gaitformer/eval.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace gaitformer::eval {

namespace {

std::string percent(const std::optional<double>& v) {
    if (!v) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", 100.0 * *v);
    return buf;
}

std::string percent_sd(const MeanSd& m) {
    if (m.n == 0) return "n/a";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.1f +- %.1f", 100.0 * m.mean, 100.0 * m.sd);
    return buf;
}

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json mean_sd_json(const MeanSd& m) {
    nlohmann::ordered_json j;
    j["n"] = m.n;
    j["mean"] = m.n ? nlohmann::ordered_json(m.mean) : nlohmann::ordered_json(nullptr);
    j["sd"] = m.n ? nlohmann::ordered_json(m.sd) : nlohmann::ordered_json(nullptr);
    return j;
}

} // namespace

std::string report_table(const EvalReport& r) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "variant=%s k=%zu seed=%llu\n", r.variant.c_str(), r.k,
                  static_cast<unsigned long long>(r.seed));
    out += line;
    std::snprintf(line, sizeof line, "%-6s %5s %5s %5s %5s %5s %8s %8s %8s %9s %7s\n", "fold", "walks", "TP", "FN",
                  "TN", "FP", "Se%", "Sp%", "Acc%", "SegAcc%", "epochs");
    out += line;
    for (const auto& f : r.folds) {
        std::snprintf(line, sizeof line, "%-6zu %5zu %5zu %5zu %5zu %5zu %8s %8s %8s %9.1f %7zu\n", f.fold,
                      f.counts.total(), f.counts.tp, f.counts.fn, f.counts.tn, f.counts.fp,
                      percent(f.metrics.sensitivity).c_str(), percent(f.metrics.specificity).c_str(),
                      percent(f.metrics.accuracy).c_str(), 100.0 * f.segment_accuracy, f.epochs_run);
        out += line;
    }
    out += "\n";
    out += "Se%  (mean +- SD): " + percent_sd(r.sensitivity) + "\n";
    out += "Sp%  (mean +- SD): " + percent_sd(r.specificity) + "\n";
    out += "Acc% (mean +- SD): " + percent_sd(r.accuracy) + "\n";
    std::snprintf(line, sizeof line, "pooled segment accuracy: %.1f%%\n", 100.0 * r.pooled_segment_accuracy);
    out += line;
    return out;
}

std::string report_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    j["variant"] = r.variant;
    j["seed"] = r.seed;
    j["k"] = r.k;
    j["validation_fraction"] = r.validation_fraction;
    const auto& c = r.train_config;
    j["train"] = {{"learning_rate", c.learning_rate},
                  {"batch_size", c.batch_size},
                  {"max_epochs", c.max_epochs},
                  {"early_stop_min_delta", c.early_stop_min_delta},
                  {"early_stop_patience", c.early_stop_patience},
                  {"early_stopping", c.early_stopping},
                  {"dropout_enabled", c.dropout_enabled}};
    auto folds = nlohmann::ordered_json::array();
    for (const auto& f : r.folds) {
        nlohmann::ordered_json fj;
        fj["fold"] = f.fold;
        fj["test_subjects"] = f.test_subjects;
        fj["tp"] = f.counts.tp;
        fj["fn"] = f.counts.fn;
        fj["tn"] = f.counts.tn;
        fj["fp"] = f.counts.fp;
        fj["sensitivity"] = optional_json(f.metrics.sensitivity);
        fj["specificity"] = optional_json(f.metrics.specificity);
        fj["accuracy"] = optional_json(f.metrics.accuracy);
        fj["test_segments"] = f.test_segments;
        fj["correct_segments"] = f.correct_segments;
        fj["segment_accuracy"] = f.segment_accuracy;
        fj["epochs_run"] = f.epochs_run;
        fj["best_epoch"] = f.best_epoch;
        fj["best_validation_loss"] = f.best_validation_loss;
        folds.push_back(std::move(fj));
    }
    j["folds"] = std::move(folds);
    j["aggregate"] = {{"sensitivity", mean_sd_json(r.sensitivity)},
                      {"specificity", mean_sd_json(r.specificity)},
                      {"accuracy", mean_sd_json(r.accuracy)},
                      {"pooled", {{"tp", r.pooled.tp}, {"fn", r.pooled.fn}, {"tn", r.pooled.tn}, {"fp", r.pooled.fp}}},
                      {"pooled_segment_accuracy", r.pooled_segment_accuracy}};
    return j.dump(2) + "\n";
}

std::string ablation_table(std::span<const std::pair<std::string, EvalReport>> rows) {
    std::string out;
    char line[200];
    std::snprintf(line, sizeof line, "%-8s %16s %16s %16s %10s\n", "variant", "Acc%", "Se%", "Sp%", "SegAcc%");
    out += line;
    for (const auto& [name, r] : rows) {
        std::snprintf(line, sizeof line, "%-8s %16s %16s %16s %10.1f\n", name.c_str(), percent_sd(r.accuracy).c_str(),
                      percent_sd(r.sensitivity).c_str(), percent_sd(r.specificity).c_str(),
                      100.0 * r.pooled_segment_accuracy);
        out += line;
    }
    return out;
}

} // namespace gaitformer::eval
