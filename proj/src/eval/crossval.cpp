#include "gaitformer/data/folds.hpp"
#include "gaitformer/data/normalization.hpp"
#include "gaitformer/errors.hpp"
#include "gaitformer/eval.hpp"

#include <algorithm>
#include <ostream>
#include <set>

namespace gaitformer::eval {

namespace {

std::vector<data::Segment> normalized_segments(std::span<const data::WalkRecord> walks,
                                               const data::NormalizationStats& stats,
                                               const model::SegmentGeometry& geometry) {
    std::vector<data::WalkRecord> normalized;
    normalized.reserve(walks.size());
    for (const auto& w : walks) {
        normalized.push_back(data::apply_normalization(w, stats));
    }
    return data::segment_walks(normalized, geometry.window, geometry.stride);
}

FoldResult run_fold(std::span<const data::WalkRecord> walks, const data::FoldPlan& plan, std::size_t fold,
                    std::span<const data::SubjectInfo> subjects, const CrossValOptions& options) {
    const std::uint64_t fold_seed = options.seed + fold;
    FoldResult result;
    result.fold = fold;
    result.test_subjects = plan.fold_subjects(fold);
    const std::set<std::string> test_ids(result.test_subjects.begin(), result.test_subjects.end());

    std::vector<data::SubjectInfo> rest;
    for (const auto& s : subjects) {
        if (!test_ids.count(s.id)) rest.push_back(s);
    }
    const auto split = data::validation_split(rest, options.validation_fraction, fold_seed);
    std::set<std::string> validation_ids;
    for (const auto& s : split.validation) validation_ids.insert(s.id);

    std::vector<data::WalkRecord> train_walks;
    std::vector<data::WalkRecord> validation_walks;
    std::vector<data::WalkRecord> test_walks;
    for (const auto& w : walks) {
        if (test_ids.count(w.subject_id)) {
            test_walks.push_back(w);
        } else if (validation_ids.count(w.subject_id)) {
            validation_walks.push_back(w);
        } else {
            train_walks.push_back(w);
        }
    }
    std::vector<data::WalkRecord> fit_walks = train_walks;
    fit_walks.insert(fit_walks.end(), validation_walks.begin(), validation_walks.end());
    const auto stats = data::fit_normalization(fit_walks);

    const auto geometry = model::segment_geometry(options.variant);
    const auto train_segments = normalized_segments(train_walks, stats, geometry);
    const auto validation_segments = normalized_segments(validation_walks, stats, geometry);
    const auto test_segments = normalized_segments(test_walks, stats, geometry);
    if (test_segments.empty()) {
        throw DataError("test fold has no segments");
    }
    for (const auto* seen : {&train_segments, &validation_segments}) {
        const auto leaked = data::leaked_subjects(*seen, test_segments);
        if (!leaked.empty()) {
            throw DataError("subject " + leaked.front() + " appears in both the test fold and its training data");
        }
    }

    model::GaitformerModel net(options.variant, fold_seed);
    net.set_normalization(stats);
    train::TrainConfig config = options.train;
    config.seed = fold_seed;
    train::TrainHooks hooks;
    hooks.log = options.log;
    const auto state = train::train(net, train_segments, validation_segments, config, hooks);
    result.epochs_run = state.epochs_run;
    result.best_epoch = state.best_epoch;
    result.best_validation_loss = state.best_validation_loss;

    const auto probs = train::predict_probabilities(net, test_segments, config.batch_size);
    result.test_segments = test_segments.size();
    for (std::size_t i = 0; i < test_segments.size(); ++i) {
        result.correct_segments += static_cast<std::size_t>(segment_vote(probs[i]) == test_segments[i].label);
    }
    result.segment_accuracy =
        static_cast<double>(result.correct_segments) / static_cast<double>(result.test_segments);
    for (const auto& w : vote_walks(test_segments, probs)) {
        result.counts.add(w.truth, w.predicted);
    }
    result.metrics = metrics(result.counts);
    return result;
}

} // namespace

EvalReport cross_validate(std::span<const data::WalkRecord> walks, const CrossValOptions& options) {
    if (options.k < 2) {
        throw ConfigError("k must be at least 2");
    }
    options.train.validate();
    const auto subjects = data::subjects_of(walks);
    const auto plan = data::build_folds(subjects, options.k, options.seed);

    EvalReport report;
    report.variant = std::string(model::variant_name(options.variant));
    report.seed = options.seed;
    report.k = options.k;
    report.validation_fraction = options.validation_fraction;
    report.train_config = options.train;
    for (std::size_t fold = 0; fold < options.k; ++fold) {
        if (options.log) {
            *options.log << "fold=" << fold << " of k=" << options.k << '\n';
        }
        try {
            report.folds.push_back(run_fold(walks, plan, fold, subjects, options));
        } catch (const Error& e) {
            throw Error("fold " + std::to_string(fold) + ": " + e.what());
        }
    }
    aggregate_folds(report);
    return report;
}

} // namespace gaitformer::eval
