#include "gaitformer/autodiff/ops.hpp"
#include "gaitformer/errors.hpp"
#include "gaitformer/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace gaitformer::train {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw ConfigError("learning_rate must be positive");
    }
    if (batch_size == 0) {
        throw ConfigError("batch_size must be positive");
    }
    if (max_epochs == 0) {
        throw ConfigError("max_epochs must be positive");
    }
    if (!(early_stop_min_delta >= 0.0)) {
        throw ConfigError("early_stop_min_delta must be non-negative");
    }
    if (early_stop_patience == 0 || early_stop_patience > max_epochs) {
        throw ConfigError("early_stop_patience must be in [1, max_epochs]");
    }
}

EarlyStopping::EarlyStopping(double min_delta, std::size_t patience)
    : min_delta_(min_delta), patience_(patience) {}

bool EarlyStopping::update(double loss) {
    if (best_ - loss > min_delta_) {
        best_ = loss;
        since_improvement_ = 0;
    } else {
        ++since_improvement_;
    }
    return since_improvement_ >= patience_;
}

std::string format_epoch_line(const EpochRecord& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "epoch=%zu train_loss=%.6f val_loss=%.6f val_acc=%.6f elapsed_s=%.1f",
                  r.epoch, r.train_loss, r.validation_loss, r.validation_accuracy, r.elapsed_s);
    return buf;
}

std::vector<std::size_t> epoch_order(std::size_t count, Rng& shuffle_rng) {
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_rng.shuffle(order.begin(), order.end());
    return order;
}

namespace {

std::vector<double> predict_logits(const model::GaitformerModel& model, std::span<const data::Segment> segments,
                                   std::size_t batch_size) {
    if (batch_size == 0) {
        throw ConfigError("batch_size must be positive");
    }
    ad::NoGradGuard no_grad;
    Rng unused(0);
    std::vector<double> out;
    out.reserve(segments.size());
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < segments.size(); start += batch_size) {
        const std::size_t n = std::min(batch_size, segments.size() - start);
        idx.resize(n);
        std::iota(idx.begin(), idx.end(), start);
        const auto z = model.forward_logits(model::make_batch(segments, idx), false, unused);
        out.insert(out.end(), z.values().begin(), z.values().end());
    }
    return out;
}

std::vector<double> probabilities_of(const std::vector<double>& logits) {
    ad::NoGradGuard no_grad;
    const auto p = ad::sigmoid(ad::Tensor::from({logits.size()}, logits));
    return {p.values().begin(), p.values().end()};
}

} // namespace

std::vector<double> predict_probabilities(const model::GaitformerModel& model,
                                          std::span<const data::Segment> segments, std::size_t batch_size) {
    if (segments.empty()) {
        return {};
    }
    return probabilities_of(predict_logits(model, segments, batch_size));
}

LossAccuracy evaluate_segments(const model::GaitformerModel& model, std::span<const data::Segment> segments,
                               std::size_t batch_size) {
    if (segments.empty()) {
        throw DataError("cannot evaluate an empty segment set");
    }
    const auto logits = predict_logits(model, segments, batch_size);
    const auto probs = probabilities_of(logits);
    std::vector<double> labels;
    labels.reserve(segments.size());
    std::size_t correct = 0;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        labels.push_back(segments[i].label);
        correct += static_cast<std::size_t>((probs[i] >= 0.5 ? 1 : 0) == segments[i].label);
    }
    ad::NoGradGuard no_grad;
    const double loss = ad::bce_with_logits(ad::Tensor::from({logits.size()}, logits), labels).item();
    return {loss, static_cast<double>(correct) / static_cast<double>(segments.size())};
}

TrainState train(model::GaitformerModel& model, std::span<const data::Segment> train_segments,
                 std::span<const data::Segment> validation_segments, const TrainConfig& config,
                 const TrainHooks& hooks) {
    config.validate();
    if (train_segments.empty() || validation_segments.empty()) {
        throw DataError("training and validation sets must both be non-empty");
    }
    const auto start_time = std::chrono::steady_clock::now();
    Rng shuffle_rng(derive_seed(config.seed, "shuffle"));
    Rng dropout_rng(derive_seed(config.seed, "dropout"));

    const auto params = model.parameters();
    AdamState adam(params);
    EarlyStopping stopper(config.early_stop_min_delta, config.early_stop_patience);
    TrainState state;
    std::vector<std::vector<double>> best = model.snapshot();

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const auto order = epoch_order(train_segments.size(), shuffle_rng);
        double loss_sum = 0.0;
        std::size_t correct = 0;
        std::size_t batch_no = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            ++batch_no;
            const std::size_t n = std::min(config.batch_size, order.size() - begin);
            const std::span<const std::size_t> idx(order.data() + begin, n);
            for (const auto& p : params) {
                ad::Tensor t = p.tensor;
                t.zero_grad();
            }
            const auto labels = model::batch_labels(train_segments, idx);
            const auto logits = model.forward_logits(model::make_batch(train_segments, idx),
                                                     config.dropout_enabled, dropout_rng);
            const auto loss = ad::bce_with_logits(logits, labels);
            const double value = loss.item();
            if (!std::isfinite(value)) {
                char buf[128];
                std::snprintf(buf, sizeof buf, "non-finite loss at epoch %zu, batch %zu: %g", epoch, batch_no,
                              value);
                throw TrainingError(buf);
            }
            loss.backward();
            adam_step(params, adam, config.learning_rate);
            loss_sum += value * static_cast<double>(n);
            const auto probs = probabilities_of({logits.values().begin(), logits.values().end()});
            for (std::size_t i = 0; i < n; ++i) {
                correct += static_cast<std::size_t>((probs[i] >= 0.5 ? 1.0 : 0.0) == labels[i]);
            }
        }

        const auto val = evaluate_segments(model, validation_segments, config.batch_size);
        EpochRecord record;
        record.epoch = epoch;
        record.train_loss = loss_sum / static_cast<double>(order.size());
        record.train_accuracy = static_cast<double>(correct) / static_cast<double>(order.size());
        record.validation_loss = val.loss;
        record.validation_accuracy = val.accuracy;
        record.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
        state.history.push_back(record);
        state.epochs_run = epoch;

        if (val.loss < state.best_validation_loss) {
            state.best_validation_loss = val.loss;
            state.best_epoch = epoch;
            best = model.snapshot();
        }
        if (hooks.log) {
            *hooks.log << format_epoch_line(record) << '\n' << std::flush;
        }
        const bool stop = stopper.update(val.loss);
        state.epochs_since_improvement = stopper.epochs_since_improvement();
        if (hooks.on_epoch && !hooks.on_epoch(record, model)) {
            break;
        }
        if (config.early_stopping && stop) {
            state.stopped_early = true;
            break;
        }
    }
    model.restore(best);
    return state;
}

} // namespace gaitformer::train
