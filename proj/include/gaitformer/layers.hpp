#pragma once

#include "gaitformer/autodiff/ops.hpp"
#include "gaitformer/autodiff/tensor.hpp"
#include "gaitformer/random.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace gaitformer::layers {

using ad::ParamList;
using ad::Tensor;

enum class Activation { none, selu, sigmoid };

// Glorot-uniform matrix of shape [fan_in, fan_out], trainable.
Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

class DenseLayer {
public:
    DenseLayer(std::size_t in_dim, std::size_t out_dim, Activation activation, Rng& rng);

    // activation(x W + b); acts on the trailing dimension of x.
    Tensor forward(const Tensor& x) const;

    // x W + b without the activation.
    Tensor pre_activation(const Tensor& x) const;

    void collect_parameters(const std::string& prefix, ParamList& out) const;

    std::size_t in_dim() const { return weights_.dim(0); }
    std::size_t out_dim() const { return weights_.dim(1); }
    Activation activation() const { return activation_; }

    static std::size_t parameter_count(std::size_t in_dim, std::size_t out_dim) {
        return in_dim * out_dim + out_dim;
    }

private:
    Tensor weights_;
    Tensor bias_;
    Activation activation_;
};

// Multi-head self-attention over a sequence of tokens of width token_dim.
// Each head has its own query/key/value projections token_dim x head_dim; head
// outputs are concatenated and projected back to token_dim with a bias.
// Queries and keys carry no bias.
class MultiHeadAttention {
public:
    MultiHeadAttention(std::size_t token_dim, std::size_t num_heads, std::size_t head_dim, Rng& rng);

    // x: [batch, L, token_dim] -> same shape. Scalar tokens (token_dim == 1)
    // take the rank-one fast path; the result matches forward_reference().
    Tensor forward(const Tensor& x) const;

    // Same map built from the generic matmul/softmax primitives.
    Tensor forward_reference(const Tensor& x) const;

    // Attention weights of one head, [batch, L, L], without graph recording.
    Tensor attention_weights(const Tensor& x, std::size_t head) const;

    void collect_parameters(const std::string& prefix, ParamList& out) const;

    std::size_t token_dim() const { return token_dim_; }
    std::size_t num_heads() const { return num_heads_; }
    std::size_t head_dim() const { return head_dim_; }

    static std::size_t parameter_count(std::size_t token_dim, std::size_t num_heads,
                                       std::size_t head_dim) {
        return 3 * num_heads * token_dim * head_dim + num_heads * head_dim * token_dim + token_dim;
    }

private:
    void check_input(const Tensor& x) const;
    Tensor project_out(const std::vector<Tensor>& heads) const;

    std::size_t token_dim_;
    std::size_t num_heads_;
    std::size_t head_dim_;
    std::vector<Tensor> query_;
    std::vector<Tensor> key_;
    std::vector<Tensor> value_;
    Tensor out_weights_;
    Tensor out_bias_;
};

struct EncoderGeometry {
    std::size_t seq_len = 0;
    std::size_t token_dim = 1;
    std::size_t num_heads = 2;
    std::size_t head_dim = 8;
    double dropout = 0.1;
    double norm_epsilon = 1e-6;
};

// Pre-norm Transformer encoder block:
//   y1 = x + dropout(mha(norm1(x)))
//   y2 = y1 + dropout(ff(norm2(y1)))
// For scalar tokens the norms run over the sequence axis with per-position
// gain/offset and ff is a seq_len -> seq_len SELU layer on the flattened
// sequence. For wider tokens the norms run over the token width and ff is a
// per-token token_dim -> token_dim SELU layer.
class EncoderBlock {
public:
    EncoderBlock(const EncoderGeometry& geometry, Rng& rng);

    // x: [batch, seq_len, token_dim] -> same shape.
    Tensor forward(const Tensor& x, bool training, Rng& dropout_rng) const;

    // Output of the first normalization, for invariance checks.
    Tensor pre_attention_norm(const Tensor& x) const;

    void collect_parameters(const std::string& prefix, ParamList& out) const;

    const EncoderGeometry& geometry() const { return geometry_; }
    const MultiHeadAttention& attention() const { return attention_; }

    static std::size_t parameter_count(const EncoderGeometry& g);

private:
    std::size_t norm_width() const;
    Tensor normalize(const Tensor& x, const Tensor& gain, const Tensor& offset) const;
    Tensor feed_forward(const Tensor& x) const;

    EncoderGeometry geometry_;
    Tensor norm1_gain_;
    Tensor norm1_offset_;
    MultiHeadAttention attention_;
    Tensor norm2_gain_;
    Tensor norm2_offset_;
    DenseLayer ff_;
};

// A stack of identical encoder blocks.
class EncoderStack {
public:
    EncoderStack(const EncoderGeometry& geometry, std::size_t depth, Rng& rng);

    Tensor forward(const Tensor& x, bool training, Rng& dropout_rng) const;
    void collect_parameters(const std::string& prefix, ParamList& out) const;

    const std::vector<EncoderBlock>& blocks() const { return blocks_; }

private:
    std::vector<EncoderBlock> blocks_;
};

// [0/(L-1), 1/(L-1), ..., 1]. Throws for length < 2.
std::vector<double> temporal_pe(std::size_t length);

// sensor / (sensor_count - 1): the constant added to every element of a
// sensor's feature vector. Throws for sensor >= sensor_count.
double spatial_pe(std::size_t sensor, std::size_t sensor_count = 18);

} // namespace gaitformer::layers
