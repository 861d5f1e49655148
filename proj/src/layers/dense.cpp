#include "gaitformer/layers.hpp"

#include "gaitformer/errors.hpp"

#include <cmath>

namespace gaitformer::layers {

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::vector<double> values(fan_in * fan_out);
    for (auto& v : values) {
        v = rng.uniform(-limit, limit);
    }
    return Tensor::from({fan_in, fan_out}, std::move(values), true);
}

DenseLayer::DenseLayer(std::size_t in_dim, std::size_t out_dim, Activation activation, Rng& rng)
    : weights_(glorot_uniform(in_dim, out_dim, rng)),
      bias_(Tensor::zeros({out_dim}, true)),
      activation_(activation) {}

Tensor DenseLayer::pre_activation(const Tensor& x) const {
    if (x.rank() == 0 || x.shape().back() != in_dim()) {
        throw ShapeError("dense layer expects trailing dimension " + std::to_string(in_dim()) +
                         ", got input " + ad::shape_to_string(x.shape()));
    }
    return ad::add(ad::matmul(x, weights_), bias_);
}

Tensor DenseLayer::forward(const Tensor& x) const {
    Tensor y = pre_activation(x);
    switch (activation_) {
    case Activation::selu: return ad::selu(y);
    case Activation::sigmoid: return ad::sigmoid(y);
    case Activation::none: break;
    }
    return y;
}

void DenseLayer::collect_parameters(const std::string& prefix, ParamList& out) const {
    out.push_back({prefix + ".weights", weights_});
    out.push_back({prefix + ".bias", bias_});
}

} // namespace gaitformer::layers
