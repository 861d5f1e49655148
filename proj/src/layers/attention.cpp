#include "gaitformer/layers.hpp"

#include "gaitformer/errors.hpp"

#include <cmath>

namespace gaitformer::layers {

MultiHeadAttention::MultiHeadAttention(std::size_t token_dim, std::size_t num_heads,
                                       std::size_t head_dim, Rng& rng)
    : token_dim_(token_dim), num_heads_(num_heads), head_dim_(head_dim) {
    if (token_dim == 0 || num_heads == 0 || head_dim == 0) {
        throw Error("multi-head attention needs positive token_dim, num_heads and head_dim");
    }
    for (std::size_t h = 0; h < num_heads; ++h) {
        query_.push_back(glorot_uniform(token_dim, head_dim, rng));
        key_.push_back(glorot_uniform(token_dim, head_dim, rng));
        value_.push_back(glorot_uniform(token_dim, head_dim, rng));
    }
    out_weights_ = glorot_uniform(num_heads * head_dim, token_dim, rng);
    out_bias_ = Tensor::zeros({token_dim}, true);
}

void MultiHeadAttention::check_input(const Tensor& x) const {
    if (x.rank() < 2 || x.shape().back() != token_dim_) {
        throw ShapeError("attention expects [..., L, " + std::to_string(token_dim_) +
                         "] input, got " + ad::shape_to_string(x.shape()));
    }
}

Tensor MultiHeadAttention::project_out(const std::vector<Tensor>& heads) const {
    const Tensor joined = heads.size() == 1 ? heads.front() : ad::concat(heads, heads.front().rank() - 1);
    return ad::add(ad::matmul(joined, out_weights_), out_bias_);
}

Tensor MultiHeadAttention::forward(const Tensor& x) const {
    check_input(x);
    const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim_));
    std::vector<Tensor> heads;
    heads.reserve(num_heads_);
    if (token_dim_ == 1) {
        // q_i . k_j = x_i x_j (w_q . w_k): the scores are rank one.
        ad::Shape seq_shape(x.shape().begin(), x.shape().end() - 1);
        const Tensor tokens = ad::reshape(x, seq_shape);
        for (std::size_t h = 0; h < num_heads_; ++h) {
            const Tensor coeff = ad::scale(ad::sum(ad::mul(query_[h], key_[h])), scale);
            const Tensor mixed = ad::scalar_token_attention(tokens, coeff);
            heads.push_back(ad::matmul(ad::reshape(mixed, x.shape()), value_[h]));
        }
    } else {
        for (std::size_t h = 0; h < num_heads_; ++h) {
            heads.push_back(ad::attention(ad::matmul(x, query_[h]), ad::matmul(x, key_[h]),
                                          ad::matmul(x, value_[h]), scale));
        }
    }
    return project_out(heads);
}

Tensor MultiHeadAttention::forward_reference(const Tensor& x) const {
    check_input(x);
    const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim_));
    std::vector<Tensor> heads;
    for (std::size_t h = 0; h < num_heads_; ++h) {
        const Tensor q = ad::matmul(x, query_[h]);
        const Tensor k = ad::matmul(x, key_[h]);
        const Tensor v = ad::matmul(x, value_[h]);
        const Tensor scores = ad::scale(ad::matmul(q, ad::transpose(k)), scale);
        const Tensor weights = ad::softmax(scores, scores.rank() - 1);
        heads.push_back(ad::matmul(weights, v));
    }
    return project_out(heads);
}

Tensor MultiHeadAttention::attention_weights(const Tensor& x, std::size_t head) const {
    check_input(x);
    if (head >= num_heads_) {
        throw Error("head index " + std::to_string(head) + " out of range");
    }
    ad::NoGradGuard no_grad;
    const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim_));
    if (token_dim_ == 1) {
        double dot = 0.0;
        for (std::size_t i = 0; i < head_dim_; ++i) {
            dot += query_[head].at(i) * key_[head].at(i);
        }
        ad::Shape seq_shape(x.shape().begin(), x.shape().end() - 1);
        return ad::scalar_token_attention_weights(ad::reshape(x, seq_shape), dot * scale);
    }
    const Tensor q = ad::matmul(x, query_[head]);
    const Tensor k = ad::matmul(x, key_[head]);
    const Tensor scores = ad::scale(ad::matmul(q, ad::transpose(k)), scale);
    return ad::softmax(scores, scores.rank() - 1);
}

void MultiHeadAttention::collect_parameters(const std::string& prefix, ParamList& out) const {
    for (std::size_t h = 0; h < num_heads_; ++h) {
        const std::string head = prefix + ".head" + std::to_string(h);
        out.push_back({head + ".query", query_[h]});
        out.push_back({head + ".key", key_[h]});
        out.push_back({head + ".value", value_[h]});
    }
    out.push_back({prefix + ".out.weights", out_weights_});
    out.push_back({prefix + ".out.bias", out_bias_});
}

} // namespace gaitformer::layers
