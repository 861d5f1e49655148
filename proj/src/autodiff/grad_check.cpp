#include "gaitformer/autodiff/grad_check.hpp"

#include "gaitformer/errors.hpp"
#include "gaitformer/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gaitformer::ad {

double relative_error(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    return std::abs(analytic - numeric) / denom;
}

GradCheckResult grad_check(const std::function<Tensor()>& loss_fn, std::span<const NamedTensor> params,
                           double tolerance, const GradCheckOptions& options) {
    if (!(tolerance > 0.0)) {
        throw Error("grad_check: tolerance must be positive");
    }
    for (const auto& p : params) {
        Tensor t = p.tensor;
        t.zero_grad();
    }
    const Tensor loss = loss_fn();
    loss.backward();

    GradCheckResult result;
    result.tolerance = tolerance;
    Rng rng(derive_seed(options.seed, "grad_check"));
    const double h = options.step;

    for (const auto& p : params) {
        Tensor t = p.tensor;
        const std::size_t n = t.size();
        std::vector<double> analytic(n, 0.0);
        if (t.has_grad()) {
            std::copy(t.grad().begin(), t.grad().end(), analytic.begin());
        }

        std::vector<std::size_t> coords(n);
        std::iota(coords.begin(), coords.end(), std::size_t{0});
        if (options.max_coords_per_tensor != 0 && n > options.max_coords_per_tensor) {
            rng.shuffle(coords.begin(), coords.end());
            coords.resize(options.max_coords_per_tensor);
        }

        double worst = 0.0;
        auto values = t.values();
        for (const std::size_t i : coords) {
            const double saved = values[i];
            const auto at = [&](double offset) {
                NoGradGuard no_grad;
                values[i] = saved + offset;
                return loss_fn().item();
            };
            const double numeric = (at(h) - at(-h)) / (2.0 * h);
            values[i] = saved;
            worst = std::max(worst, relative_error(analytic[i], numeric));
            ++result.coordinates_checked;
        }
        result.per_parameter_errors[p.name] = worst;
        result.max_relative_error = std::max(result.max_relative_error, worst);
    }
    return result;
}

} // namespace gaitformer::ad
