#pragma once

#include "gaitformer/autodiff/tensor.hpp"
#include "gaitformer/data/segmentation.hpp"
#include "gaitformer/model.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace gaitformer::train {

struct TrainConfig {
    double learning_rate = 0.001;
    std::size_t batch_size = 110;
    std::size_t max_epochs = 100;
    double early_stop_min_delta = 0.01;
    std::size_t early_stop_patience = 20;
    bool early_stopping = true;
    bool dropout_enabled = true;
    std::uint64_t seed = 0;

    // Throws ConfigError for non-positive values or patience > max_epochs.
    void validate() const;
};

struct AdamOptions {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// First/second moment accumulators shaped like the parameters they track.
struct AdamState {
    explicit AdamState(const ad::ParamList& params);

    std::size_t step = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
};

// Bias-corrected Adam update applied in place. Throws TrainingError if a
// parameter has no gradient or the state does not match the parameters.
void adam_step(const ad::ParamList& params, AdamState& state, double learning_rate,
               const AdamOptions& options = {});

// Patience counter on a monitored loss. An epoch improves when
// best - current > min_delta; the counter resets on improvement.
class EarlyStopping {
public:
    EarlyStopping(double min_delta, std::size_t patience);

    // Records one epoch; returns true when training should stop.
    bool update(double loss);

    double best() const { return best_; }
    std::size_t epochs_since_improvement() const { return since_improvement_; }

private:
    double min_delta_;
    std::size_t patience_;
    double best_ = std::numeric_limits<double>::infinity();
    std::size_t since_improvement_ = 0;
};

struct EpochRecord {
    std::size_t epoch = 0; // 1-based
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double validation_loss = 0.0;
    double validation_accuracy = 0.0;
    double elapsed_s = 0.0;
};

struct TrainState {
    std::size_t epochs_run = 0;
    std::size_t best_epoch = 0;
    double best_validation_loss = std::numeric_limits<double>::infinity();
    std::size_t epochs_since_improvement = 0;
    bool stopped_early = false;
    std::vector<EpochRecord> history;
};

struct TrainHooks {
    // Receives one formatted line per epoch.
    std::ostream* log = nullptr;
    // Called after every epoch; returning false ends training.
    std::function<bool(const EpochRecord&, const model::GaitformerModel&)> on_epoch;
};

// Mini-batch Adam on mean binary cross-entropy with per-epoch shuffling and
// early stopping on validation loss. On return the model holds the
// parameters of the epoch with the lowest validation loss.
TrainState train(model::GaitformerModel& model, std::span<const data::Segment> train_segments,
                 std::span<const data::Segment> validation_segments, const TrainConfig& config,
                 const TrainHooks& hooks = {});

// "epoch=3 train_loss=0.512345 val_loss=0.498765 val_acc=0.812500 elapsed_s=12.3"
std::string format_epoch_line(const EpochRecord& record);

// Segments visited by each epoch's batches, in order.
std::vector<std::size_t> epoch_order(std::size_t count, Rng& shuffle_rng);

// Probabilities with dropout off, computed in batches without graph recording.
std::vector<double> predict_probabilities(const model::GaitformerModel& model,
                                          std::span<const data::Segment> segments,
                                          std::size_t batch_size = 110);

struct LossAccuracy {
    double loss = 0.0;
    double accuracy = 0.0;
};

// Mean BCE and segment accuracy (threshold 0.5 inclusive), dropout off.
LossAccuracy evaluate_segments(const model::GaitformerModel& model, std::span<const data::Segment> segments,
                               std::size_t batch_size = 110);

} // namespace gaitformer::train
