#include "gaitformer/model.hpp"

#include "gaitformer/errors.hpp"

#include <algorithm>
#include <string>

namespace gaitformer::model {

namespace {

constexpr std::size_t kTokenWidthC = 50;
constexpr std::size_t kTokenHeadDimC = kTokenWidthC / kHeads;

layers::EncoderGeometry scalar_geometry(std::size_t seq_len) {
    layers::EncoderGeometry g;
    g.seq_len = seq_len;
    g.token_dim = 1;
    g.num_heads = kHeads;
    g.head_dim = kScalarHeadDim;
    g.dropout = kDropout;
    return g;
}

layers::EncoderGeometry token_geometry() {
    layers::EncoderGeometry g;
    g.seq_len = kSensors;
    g.token_dim = kTokenWidthC;
    g.num_heads = kHeads;
    g.head_dim = kTokenHeadDimC;
    g.dropout = kDropout;
    return g;
}

std::string two_digits(std::size_t i) {
    return (i < 10 ? "0" : "") + std::to_string(i);
}

} // namespace

std::string_view variant_name(Variant variant) {
    switch (variant) {
    case Variant::full: return "full";
    case Variant::B: return "B";
    case Variant::C: return "C";
    }
    return "?";
}

Variant parse_variant(std::string_view name) {
    if (name == "full") return Variant::full;
    if (name == "B") return Variant::B;
    if (name == "C") return Variant::C;
    throw ConfigError("unknown model variant '" + std::string(name) + "', expected one of {full,B,C}");
}

SegmentGeometry segment_geometry(Variant variant) {
    return variant == Variant::C ? SegmentGeometry{50, 25} : SegmentGeometry{100, 50};
}

GaitformerModel::GaitformerModel(Variant variant, std::uint64_t seed) : variant_(variant), seed_(seed) {
    Rng rng(derive_seed(seed, "model.init"));
    const std::size_t window = segment_geometry(variant).window;
    if (variant == Variant::C) {
        spatiotemporal_.emplace(token_geometry(), kEncoderDepth, rng);
    } else {
        temporal_.reserve(kSensors);
        for (std::size_t s = 0; s < kSensors; ++s) {
            temporal_.emplace_back(scalar_geometry(window), kEncoderDepth, rng);
        }
        if (variant == Variant::full) {
            reduce_.reserve(kSensors);
            for (std::size_t s = 0; s < kSensors; ++s) {
                reduce_.emplace_back(window, kReducedWidth, layers::Activation::selu, rng);
            }
            spatial_.emplace(scalar_geometry(kSensors * kReducedWidth), kEncoderDepth, rng);
        }
    }
    head_.emplace_back(head_input_width(), kHidden1, layers::Activation::selu, rng);
    head_.emplace_back(kHidden1, kHidden2, layers::Activation::selu, rng);
    head_.emplace_back(kHidden2, 1, layers::Activation::sigmoid, rng);
}

std::size_t GaitformerModel::head_input_width() const {
    switch (variant_) {
    case Variant::full: return kSensors * kReducedWidth;
    case Variant::B: return kSensors * segment_geometry(Variant::B).window;
    case Variant::C: return kSensors * kTokenWidthC;
    }
    return 0;
}

GaitformerModel GaitformerModel::clone() const {
    GaitformerModel copy(variant_, seed_);
    copy.restore(snapshot());
    copy.normalization_ = normalization_;
    return copy;
}

void GaitformerModel::check_batch(const Tensor& batch) const {
    const auto& shape = batch.shape();
    if (shape.size() != 3 || shape[1] != kSensors) {
        throw ShapeError("model expects a [batch, 18, L] input, got " + ad::shape_to_string(shape));
    }
    if (shape[2] != segment_length()) {
        throw ShapeError("variant " + std::string(variant_name(variant_)) + " expects segments of length " +
                         std::to_string(segment_length()) + ", got " + std::to_string(shape[2]));
    }
}

std::vector<Tensor> GaitformerModel::sensor_features(const Tensor& batch, bool training,
                                                     Rng& dropout_rng) const {
    check_batch(batch);
    if (variant_ == Variant::C) {
        throw Error("variant C has no per-sensor pathway");
    }
    const std::size_t n = batch.dim(0);
    const std::size_t len = batch.dim(2);
    const auto ramp = layers::temporal_pe(len);
    const Tensor position = Tensor::from({len, 1}, ramp);

    std::vector<Tensor> features;
    features.reserve(kSensors);
    for (std::size_t s = 0; s < kSensors; ++s) {
        const Tensor channel = ad::reshape(ad::slice(batch, 1, s, 1), {n, len, 1});
        const Tensor encoded = temporal_[s].forward(ad::add(channel, position), training, dropout_rng);
        const Tensor flat = ad::reshape(encoded, {n, len});
        if (variant_ == Variant::B) {
            features.push_back(flat);
            continue;
        }
        const Tensor reduced = ad::dropout(reduce_[s].forward(flat), kDropout, training, dropout_rng);
        features.push_back(ad::add(reduced, Tensor::scalar(layers::spatial_pe(s, kSensors))));
    }
    return features;
}

Tensor GaitformerModel::head_logits(const Tensor& features, bool training, Rng& dropout_rng) const {
    Tensor h = ad::dropout(head_[0].forward(features), kDropout, training, dropout_rng);
    h = ad::dropout(head_[1].forward(h), kDropout, training, dropout_rng);
    const Tensor z = head_[2].pre_activation(h);
    return ad::reshape(z, {z.dim(0)});
}

Tensor GaitformerModel::forward(const Tensor& batch, bool training, Rng& dropout_rng) const {
    return ad::sigmoid(forward_logits(batch, training, dropout_rng));
}

Tensor GaitformerModel::forward_logits(const Tensor& batch, bool training, Rng& dropout_rng) const {
    check_batch(batch);
    const std::size_t n = batch.dim(0);
    if (variant_ == Variant::C) {
        std::vector<double> shift(kSensors * kTokenWidthC);
        for (std::size_t s = 0; s < kSensors; ++s) {
            std::fill_n(shift.begin() + static_cast<std::ptrdiff_t>(s * kTokenWidthC), kTokenWidthC,
                        layers::spatial_pe(s, kSensors));
        }
        const Tensor x = ad::add(batch, Tensor::from({kSensors, kTokenWidthC}, std::move(shift)));
        const Tensor encoded = spatiotemporal_->forward(x, training, dropout_rng);
        return head_logits(ad::reshape(encoded, {n, kSensors * kTokenWidthC}), training, dropout_rng);
    }

    const Tensor joined = ad::concat(sensor_features(batch, training, dropout_rng), 1);
    if (variant_ == Variant::B) {
        return head_logits(joined, training, dropout_rng);
    }
    const std::size_t width = kSensors * kReducedWidth;
    const Tensor encoded = spatial_->forward(ad::reshape(joined, {n, width, 1}), training, dropout_rng);
    return head_logits(ad::reshape(encoded, {n, width}), training, dropout_rng);
}

ad::ParamList GaitformerModel::parameters() const {
    ad::ParamList out;
    for (std::size_t s = 0; s < temporal_.size(); ++s) {
        temporal_[s].collect_parameters("temporal." + two_digits(s), out);
    }
    for (std::size_t s = 0; s < reduce_.size(); ++s) {
        reduce_[s].collect_parameters("reduce." + two_digits(s), out);
    }
    if (spatial_) {
        spatial_->collect_parameters("spatial", out);
    }
    if (spatiotemporal_) {
        spatiotemporal_->collect_parameters("spatiotemporal", out);
    }
    head_[0].collect_parameters("head.fc1", out);
    head_[1].collect_parameters("head.fc2", out);
    head_[2].collect_parameters("head.output", out);
    return out;
}

std::size_t GaitformerModel::parameter_count() const {
    std::size_t total = 0;
    for (const auto& p : parameters()) {
        total += p.tensor.size();
    }
    return total;
}

std::size_t GaitformerModel::expected_parameter_count(Variant variant) {
    // Block over L scalar tokens: two norms (4L), attention
    // (3*H*hd query/key/value + H*hd output + 1 bias), feed-forward L*L + L.
    const auto scalar_block = [](std::size_t l) {
        return 4 * l + (3 * kHeads * kScalarHeadDim + kHeads * kScalarHeadDim + 1) + (l * l + l);
    };
    // Block over tokens of width d: norms 4d, attention 4*H*d*hd + d, per-token ff d*d + d.
    const auto token_block = [](std::size_t d, std::size_t hd) {
        return 4 * d + (4 * kHeads * d * hd + d) + (d * d + d);
    };
    const auto head = [](std::size_t in) {
        return (in * kHidden1 + kHidden1) + (kHidden1 * kHidden2 + kHidden2) + (kHidden2 + 1);
    };
    switch (variant) {
    case Variant::full:
        return kSensors * kEncoderDepth * scalar_block(100) + kSensors * (100 * kReducedWidth + kReducedWidth) +
               kEncoderDepth * scalar_block(kSensors * kReducedWidth) + head(kSensors * kReducedWidth);
    case Variant::B:
        return kSensors * kEncoderDepth * scalar_block(100) + head(kSensors * 100);
    case Variant::C:
        return kEncoderDepth * token_block(kTokenWidthC, kTokenHeadDimC) + head(kSensors * kTokenWidthC);
    }
    return 0;
}

void GaitformerModel::fill_parameters(double value) {
    for (auto& p : parameters()) {
        auto v = p.tensor.values();
        std::fill(v.begin(), v.end(), value);
    }
}

std::vector<std::vector<double>> GaitformerModel::snapshot() const {
    std::vector<std::vector<double>> out;
    for (const auto& p : parameters()) {
        out.emplace_back(p.tensor.values().begin(), p.tensor.values().end());
    }
    return out;
}

void GaitformerModel::restore(const std::vector<std::vector<double>>& values) {
    auto params = parameters();
    if (values.size() != params.size()) {
        throw ShapeError("snapshot has " + std::to_string(values.size()) + " tensors, model has " +
                         std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto dst = params[i].tensor.values();
        if (values[i].size() != dst.size()) {
            throw ShapeError("snapshot size mismatch for " + params[i].name);
        }
        std::copy(values[i].begin(), values[i].end(), dst.begin());
    }
}

Tensor make_batch(std::span<const data::Segment> segments, std::span<const std::size_t> indices) {
    if (indices.empty()) {
        throw ShapeError("cannot build an empty batch");
    }
    const auto& first = segments[indices[0]];
    const std::size_t per = first.channels * first.length;
    std::vector<double> values;
    values.reserve(indices.size() * per);
    for (const std::size_t i : indices) {
        const auto& s = segments[i];
        if (s.channels != first.channels || s.length != first.length) {
            throw ShapeError("segments in one batch must share a shape");
        }
        values.insert(values.end(), s.values.begin(), s.values.end());
    }
    return Tensor::from({indices.size(), first.channels, first.length}, std::move(values));
}

Tensor make_batch(std::span<const data::Segment> segments) {
    std::vector<std::size_t> all(segments.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        all[i] = i;
    }
    return make_batch(segments, all);
}

std::vector<double> batch_labels(std::span<const data::Segment> segments,
                                 std::span<const std::size_t> indices) {
    std::vector<double> labels;
    labels.reserve(indices.size());
    for (const std::size_t i : indices) {
        labels.push_back(static_cast<double>(segments[i].label));
    }
    return labels;
}

} // namespace gaitformer::model
