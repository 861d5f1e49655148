#pragma once

#include "gaitformer/autodiff/tensor.hpp"
#include "gaitformer/random.hpp"

#include <span>
#include <vector>

namespace gaitformer::ad {

// Elementwise binary ops. Shapes must match, or the smaller operand's shape
// must equal the trailing dimensions of the larger one (it is then repeated
// over the leading batch dimensions).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& a, double c);

// a[..., M, K] x b[K, N] -> [..., M, N]  (shared right operand), or
// a[..., M, K] x b[..., M', K, N] with identical leading dims (batched).
Tensor matmul(const Tensor& a, const Tensor& b);

// Swaps the last two dimensions.
Tensor transpose(const Tensor& a);

Tensor reshape(const Tensor& a, Shape shape);

// Collapses every axis from `start_axis` on into one.
Tensor flatten(const Tensor& a, std::size_t start_axis = 1);

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);

// Elements [start, start + length) along `axis`; the axis is kept.
Tensor slice(const Tensor& a, std::size_t axis, std::size_t start, std::size_t length);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

// Max-subtracted softmax along `axis`.
Tensor softmax(const Tensor& a, std::size_t axis);

// Normalizes over the last axis: gain * (a - mean) / sqrt(var + epsilon) + offset,
// with population variance. gain and offset have the last axis' length.
Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& offset, double epsilon);

inline constexpr double kSeluLambda = 1.0507009873554804934193349852946;
inline constexpr double kSeluAlpha = 1.6732632423543772848170429916717;

Tensor selu(const Tensor& a);

// Logistic function, clamped so the result stays strictly inside (0, 1).
Tensor sigmoid(const Tensor& a);

// Inverted dropout. Identity when !training or rate == 0.
Tensor dropout(const Tensor& a, double rate, bool training, Rng& rng);

inline constexpr double kBceEpsilon = 1e-12;

// Mean binary cross-entropy; p is clamped to [eps, 1 - eps].
Tensor bce_loss(const Tensor& p, std::span<const double> labels);

// bce_loss(sigmoid(z), labels) evaluated as softplus(z) - y z, which never
// forms 1 - p. z is clamped to the logits of [eps, 1 - eps].
Tensor bce_with_logits(const Tensor& z, std::span<const double> labels);

// Fused scaled dot-product attention: softmax(q k^T * scale) v, rows over the
// key axis. q, k, v are [..., L, D] with matching leading dims.
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, double scale);

// Attention for sequences of scalar tokens x[..., L] when query and key are
// rank-one lifts of the token: score(i, j) = coeff * x_i * x_j. Returns
// z_i = sum_j softmax_j(score(i, j)) * x_j with the same shape as x.
// coeff is a single-element tensor.
Tensor scalar_token_attention(const Tensor& x, const Tensor& coeff);

// Row-stochastic weights of scalar_token_attention, [..., L, L]; no graph.
Tensor scalar_token_attention_weights(const Tensor& x, double coeff);

} // namespace gaitformer::ad
