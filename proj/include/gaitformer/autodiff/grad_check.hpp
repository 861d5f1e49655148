#pragma once

#include "gaitformer/autodiff/tensor.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>

namespace gaitformer::ad {

struct GradCheckOptions {
    double step = 1e-5;
    // 0 checks every coordinate; otherwise at most this many coordinates per
    // tensor, drawn without replacement.
    std::size_t max_coords_per_tensor = 0;
    std::uint64_t seed = 0;
};

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::map<std::string, double> per_parameter_errors;
    double tolerance = 0.0;
    std::size_t coordinates_checked = 0;

    bool passed() const { return max_relative_error <= tolerance; }
};

// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8)
double relative_error(double analytic, double numeric);

// Compares reverse-mode gradients of `loss_fn` with central differences.
// loss_fn must rebuild its graph from the current parameter values on every
// call and be deterministic. Parameter gradients are zeroed first and hold
// the analytic gradient afterwards.
GradCheckResult grad_check(const std::function<Tensor()>& loss_fn, std::span<const NamedTensor> params,
                           double tolerance, const GradCheckOptions& options = {});

} // namespace gaitformer::ad
