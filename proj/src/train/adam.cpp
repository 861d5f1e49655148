#include "gaitformer/errors.hpp"
#include "gaitformer/train.hpp"

#include <cmath>

namespace gaitformer::train {

AdamState::AdamState(const ad::ParamList& params) {
    m.reserve(params.size());
    v.reserve(params.size());
    for (const auto& p : params) {
        m.emplace_back(p.tensor.size(), 0.0);
        v.emplace_back(p.tensor.size(), 0.0);
    }
}

void adam_step(const ad::ParamList& params, AdamState& state, double learning_rate,
               const AdamOptions& options) {
    if (state.m.size() != params.size()) {
        throw TrainingError("adam state tracks " + std::to_string(state.m.size()) + " tensors, got " +
                            std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i].tensor.has_grad()) {
            throw TrainingError("missing gradient for parameter " + params[i].name);
        }
        if (state.m[i].size() != params[i].tensor.size()) {
            throw TrainingError("adam state shape mismatch for " + params[i].name);
        }
    }
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(options.beta1, t);
    const double correction2 = 1.0 - std::pow(options.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        ad::Tensor tensor = params[i].tensor;
        auto theta = tensor.values();
        const auto g = tensor.grad();
        auto& m = state.m[i];
        auto& v = state.v[i];
        for (std::size_t j = 0; j < theta.size(); ++j) {
            m[j] = options.beta1 * m[j] + (1.0 - options.beta1) * g[j];
            v[j] = options.beta2 * v[j] + (1.0 - options.beta2) * g[j] * g[j];
            const double m_hat = m[j] / correction1;
            const double v_hat = v[j] / correction2;
            theta[j] -= learning_rate * m_hat / (std::sqrt(v_hat) + options.epsilon);
        }
    }
}

} // namespace gaitformer::train
