#include "gaitformer/layers.hpp"

#include "gaitformer/errors.hpp"

namespace gaitformer::layers {

EncoderBlock::EncoderBlock(const EncoderGeometry& geometry, Rng& rng)
    : geometry_(geometry),
      norm1_gain_(Tensor::full({norm_width()}, 1.0, true)),
      norm1_offset_(Tensor::zeros({norm_width()}, true)),
      attention_(geometry.token_dim, geometry.num_heads, geometry.head_dim, rng),
      norm2_gain_(Tensor::full({norm_width()}, 1.0, true)),
      norm2_offset_(Tensor::zeros({norm_width()}, true)),
      ff_(norm_width(), norm_width(), Activation::selu, rng) {
    if (geometry.seq_len == 0) {
        throw Error("encoder block needs a positive sequence length");
    }
}

std::size_t EncoderBlock::norm_width() const {
    return geometry_.token_dim == 1 ? geometry_.seq_len : geometry_.token_dim;
}

std::size_t EncoderBlock::parameter_count(const EncoderGeometry& g) {
    const std::size_t width = g.token_dim == 1 ? g.seq_len : g.token_dim;
    return 4 * width +
           MultiHeadAttention::parameter_count(g.token_dim, g.num_heads, g.head_dim) +
           DenseLayer::parameter_count(width, width);
}

Tensor EncoderBlock::normalize(const Tensor& x, const Tensor& gain, const Tensor& offset) const {
    if (geometry_.token_dim != 1) {
        return ad::layer_norm(x, gain, offset, geometry_.norm_epsilon);
    }
    ad::Shape seq_shape(x.shape().begin(), x.shape().end() - 1);
    return ad::reshape(ad::layer_norm(ad::reshape(x, seq_shape), gain, offset, geometry_.norm_epsilon),
                       x.shape());
}

Tensor EncoderBlock::feed_forward(const Tensor& x) const {
    if (geometry_.token_dim != 1) {
        return ff_.forward(x);
    }
    ad::Shape seq_shape(x.shape().begin(), x.shape().end() - 1);
    return ad::reshape(ff_.forward(ad::reshape(x, seq_shape)), x.shape());
}

Tensor EncoderBlock::pre_attention_norm(const Tensor& x) const {
    return normalize(x, norm1_gain_, norm1_offset_);
}

Tensor EncoderBlock::forward(const Tensor& x, bool training, Rng& dropout_rng) const {
    const auto& shape = x.shape();
    if (shape.size() < 2 || shape[shape.size() - 2] != geometry_.seq_len ||
        shape.back() != geometry_.token_dim) {
        throw ShapeError("encoder block expects [..., " + std::to_string(geometry_.seq_len) + ", " +
                         std::to_string(geometry_.token_dim) + "], got " +
                         ad::shape_to_string(shape));
    }
    const Tensor attended = attention_.forward(normalize(x, norm1_gain_, norm1_offset_));
    const Tensor y1 = ad::add(x, ad::dropout(attended, geometry_.dropout, training, dropout_rng));
    const Tensor fed = feed_forward(normalize(y1, norm2_gain_, norm2_offset_));
    return ad::add(y1, ad::dropout(fed, geometry_.dropout, training, dropout_rng));
}

void EncoderBlock::collect_parameters(const std::string& prefix, ParamList& out) const {
    out.push_back({prefix + ".norm1.gain", norm1_gain_});
    out.push_back({prefix + ".norm1.offset", norm1_offset_});
    attention_.collect_parameters(prefix + ".attention", out);
    out.push_back({prefix + ".norm2.gain", norm2_gain_});
    out.push_back({prefix + ".norm2.offset", norm2_offset_});
    ff_.collect_parameters(prefix + ".ff", out);
}

EncoderStack::EncoderStack(const EncoderGeometry& geometry, std::size_t depth, Rng& rng) {
    blocks_.reserve(depth);
    for (std::size_t i = 0; i < depth; ++i) {
        blocks_.emplace_back(geometry, rng);
    }
}

Tensor EncoderStack::forward(const Tensor& x, bool training, Rng& dropout_rng) const {
    Tensor y = x;
    for (const auto& block : blocks_) {
        y = block.forward(y, training, dropout_rng);
    }
    return y;
}

void EncoderStack::collect_parameters(const std::string& prefix, ParamList& out) const {
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        blocks_[i].collect_parameters(prefix + ".block" + std::to_string(i), out);
    }
}

} // namespace gaitformer::layers
