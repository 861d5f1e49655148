#pragma once

#include "gaitformer/data/segmentation.hpp"
#include "gaitformer/data/walk.hpp"
#include "gaitformer/model.hpp"
#include "gaitformer/train.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gaitformer::eval {

struct SegmentResult {
    double probability = 0.0;
    int vote = 0;
};

// 1 iff probability >= 0.5.
int segment_vote(double probability);

// Throws ShapeError when the segment does not fit the model.
SegmentResult classify_segment(const model::GaitformerModel& model, const data::Segment& segment);

// 1 when positive votes exceed half, 0 when below; on a tie, 1 iff the mean
// probability is >= 0.5. Throws DataError on empty input.
int majority_vote(std::span<const SegmentResult> results);

// Parkinson is the positive class.
struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;
    std::size_t fp = 0;

    std::size_t total() const { return tp + fn + tn + fp; }
    void add(int truth, int predicted);
    ConfusionCounts& operator+=(const ConfusionCounts& other);
    bool operator==(const ConfusionCounts&) const = default;
};

// Undefined ratios are nullopt, never 0.
struct Metrics {
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    std::optional<double> accuracy;
};

Metrics metrics(const ConfusionCounts& counts);

struct WalkPrediction {
    std::string walk_id;
    std::string subject_id;
    int truth = 0;
    int predicted = 0;
    std::size_t segments = 0;
    std::size_t positive_votes = 0;
    double mean_probability = 0.0;
};

// Groups segments by walk (first-appearance order) and votes each walk.
std::vector<WalkPrediction> vote_walks(std::span<const data::Segment> segments,
                                       std::span<const double> probabilities);

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0; // population
    std::size_t n = 0;
};

// Over the given values; n = 0 gives mean = sd = NaN.
MeanSd mean_sd(std::span<const double> values);

struct FoldResult {
    std::size_t fold = 0;
    std::vector<std::string> test_subjects;
    ConfusionCounts counts;
    Metrics metrics;
    std::size_t test_segments = 0;
    std::size_t correct_segments = 0;
    double segment_accuracy = 0.0;
    std::size_t epochs_run = 0;
    std::size_t best_epoch = 0;
    double best_validation_loss = 0.0;
};

struct EvalReport {
    std::string variant;
    std::uint64_t seed = 0;
    std::size_t k = 0;
    double validation_fraction = 0.0;
    train::TrainConfig train_config;
    std::vector<FoldResult> folds;
    // Mean and SD over folds where the metric is defined.
    MeanSd sensitivity;
    MeanSd specificity;
    MeanSd accuracy;
    ConfusionCounts pooled;
    double pooled_segment_accuracy = 0.0;
};

// Fills the aggregate fields of `report` from report.folds.
void aggregate_folds(EvalReport& report);

struct CrossValOptions {
    model::Variant variant = model::Variant::full;
    train::TrainConfig train;
    std::size_t k = 10;
    std::uint64_t seed = 0;
    double validation_fraction = 0.1;
    // Per-fold progress and epoch lines.
    std::ostream* log = nullptr;
};

// Subject-level, class-stratified k-fold cross-validation. Fold f uses seed
// + f for its validation split, model initialization and training. Any fold
// failure is rethrown with the fold index.
EvalReport cross_validate(std::span<const data::WalkRecord> walks, const CrossValOptions& options);

// Human-readable table with one row per fold and a mean +- SD row.
std::string report_table(const EvalReport& report);

// Machine-readable report; contains no timings so reruns are byte-identical.
std::string report_json(const EvalReport& report);

// Accuracy, sensitivity and specificity per variant, one row each.
std::string ablation_table(std::span<const std::pair<std::string, EvalReport>> rows);

} // namespace gaitformer::eval
