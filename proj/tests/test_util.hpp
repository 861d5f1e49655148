#pragma once

#include "gaitformer/autodiff/tensor.hpp"
#include "gaitformer/random.hpp"

#include <functional>
#include <vector>

namespace gaitformer::testing {

inline ad::Tensor random_tensor(ad::Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0,
                                bool requires_grad = false) {
    std::vector<double> v(ad::shape_size(shape));
    for (auto& e : v) e = rng.uniform(lo, hi);
    return ad::Tensor::from(std::move(shape), std::move(v), requires_grad);
}

// Central difference of f with respect to every element of x.
inline std::vector<double> numeric_gradient(const std::function<double()>& f, ad::Tensor x, double h = 1e-6) {
    auto v = x.values();
    std::vector<double> g(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double saved = v[i];
        v[i] = saved + h;
        const double plus = f();
        v[i] = saved - h;
        const double minus = f();
        v[i] = saved;
        g[i] = (plus - minus) / (2.0 * h);
    }
    return g;
}

} // namespace gaitformer::testing
