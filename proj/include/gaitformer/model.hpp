#pragma once

#include "gaitformer/autodiff/tensor.hpp"
#include "gaitformer/data/normalization.hpp"
#include "gaitformer/data/segmentation.hpp"
#include "gaitformer/layers.hpp"
#include "gaitformer/random.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace gaitformer::model {

using ad::Tensor;

// full: temporal encoders -> FC-0 -> spatial encoder -> head.
// B:    temporal encoders -> concatenation -> head.
// C:    one spatio-temporal encoder over 18 tokens of width 50 -> head.
enum class Variant { full, B, C };

std::string_view variant_name(Variant variant);

// Accepts "full", "B", "C"; throws ConfigError listing them otherwise.
Variant parse_variant(std::string_view name);

struct SegmentGeometry {
    std::size_t window = 100;
    std::size_t stride = 50;
};

// 100/50 for full and B, 50/25 for C.
SegmentGeometry segment_geometry(Variant variant);

inline constexpr std::size_t kSensors = 18;
inline constexpr std::size_t kEncoderDepth = 2;
inline constexpr std::size_t kHeads = 2;
inline constexpr std::size_t kScalarHeadDim = 8;
inline constexpr std::size_t kReducedWidth = 10;
inline constexpr std::size_t kHidden1 = 100;
inline constexpr std::size_t kHidden2 = 20;
inline constexpr double kDropout = 0.1;

class GaitformerModel {
public:
    GaitformerModel(Variant variant, std::uint64_t seed);

    GaitformerModel(GaitformerModel&&) noexcept = default;
    GaitformerModel& operator=(GaitformerModel&&) noexcept = default;
    GaitformerModel(const GaitformerModel&) = delete;
    GaitformerModel& operator=(const GaitformerModel&) = delete;

    // Independent copy of every parameter value.
    GaitformerModel clone() const;

    Variant variant() const { return variant_; }
    std::uint64_t seed() const { return seed_; }
    std::size_t segment_length() const { return segment_geometry(variant_).window; }
    std::size_t head_input_width() const;

    // batch: [B, 18, L] normalized segments -> [B] probabilities in (0, 1).
    Tensor forward(const Tensor& batch, bool training, Rng& dropout_rng) const;

    // The output layer's pre-sigmoid values; forward() is sigmoid of these.
    Tensor forward_logits(const Tensor& batch, bool training, Rng& dropout_rng) const;

    // Per-sensor vectors that are concatenated before the spatial encoder
    // (full) or the head (B): FC-0 outputs plus the sensor shift for full,
    // raw temporal encoder outputs for B. Throws for C.
    std::vector<Tensor> sensor_features(const Tensor& batch, bool training, Rng& dropout_rng) const;

    // Every trainable tensor in a fixed order with stable names.
    ad::ParamList parameters() const;
    std::size_t parameter_count() const;

    // Closed-form count for a variant.
    static std::size_t expected_parameter_count(Variant variant);

    void fill_parameters(double value);

    std::vector<std::vector<double>> snapshot() const;
    void restore(const std::vector<std::vector<double>>& values);

    const data::NormalizationStats& normalization() const { return normalization_; }
    void set_normalization(data::NormalizationStats stats) { normalization_ = std::move(stats); }

private:
    Tensor head_logits(const Tensor& features, bool training, Rng& dropout_rng) const;
    void check_batch(const Tensor& batch) const;

    Variant variant_;
    std::uint64_t seed_;
    data::NormalizationStats normalization_;

    std::vector<layers::EncoderStack> temporal_;
    std::vector<layers::DenseLayer> reduce_;
    std::optional<layers::EncoderStack> spatial_;
    std::optional<layers::EncoderStack> spatiotemporal_;
    std::vector<layers::DenseLayer> head_;
};

// Stacks segments[indices] into a [B, 18, L] tensor.
Tensor make_batch(std::span<const data::Segment> segments, std::span<const std::size_t> indices);
Tensor make_batch(std::span<const data::Segment> segments);
std::vector<double> batch_labels(std::span<const data::Segment> segments,
                                 std::span<const std::size_t> indices);

inline constexpr std::uint32_t kModelFileVersion = 1;

// Binary model container; layout in docs/FORMATS.md.
void save_model(const GaitformerModel& model, const std::filesystem::path& path);

// Throws ModelFileError on version mismatch, corruption, shape disagreement,
// or (when `expected` is given) a different variant.
GaitformerModel load_model(const std::filesystem::path& path,
                           std::optional<Variant> expected = std::nullopt);

} // namespace gaitformer::model
