#include "gaitformer/autodiff/ops.hpp"
#include "gaitformer/cli.hpp"
#include "gaitformer/layers.hpp"
#include "gaitformer/model.hpp"

#include <cstdio>
#include <ostream>

namespace gaitformer::cli {

namespace {

ad::Tensor random_tensor(ad::Shape shape, double lo, double hi, Rng& rng, bool requires_grad) {
    std::vector<double> v(ad::shape_size(shape));
    for (auto& e : v) e = rng.uniform(lo, hi);
    return ad::Tensor::from(std::move(shape), std::move(v), requires_grad);
}

// sum(y * r) for a fixed random r, so every output element matters.
constexpr double kModelStep = 1e-4;

ad::Tensor projection_loss(const ad::Tensor& y, const ad::Tensor& r) { return ad::sum(ad::mul(y, r)); }

} // namespace

std::vector<GradCheckCase> gradcheck_suite(std::uint64_t seed, double tolerance, std::ostream* log) {
    Rng rng(derive_seed(seed, "grad_check.inputs"));
    Rng unused(0);
    std::vector<GradCheckCase> cases;

    const auto run_case = [&](const std::string& name, const std::function<ad::Tensor()>& loss,
                              const ad::ParamList& params, std::size_t max_coords, double step = 1e-5) {
        ad::GradCheckOptions options;
        options.seed = seed;
        options.step = step;
        options.max_coords_per_tensor = max_coords;
        cases.push_back({name, ad::grad_check(loss, params, tolerance, options)});
        if (log) {
            const auto& r = cases.back().result;
            char buf[200];
            std::snprintf(buf, sizeof buf, "case=%s max_rel_error=%.3e coords=%zu %s", name.c_str(),
                          r.max_relative_error, r.coordinates_checked, r.passed() ? "PASS" : "FAIL");
            *log << buf << '\n' << std::flush;
        }
    };

    {
        layers::DenseLayer dense(7, 5, layers::Activation::selu, rng);
        const auto x = random_tensor({4, 7}, -2.0, 2.0, rng, true);
        const auto r = random_tensor({4, 5}, -1.0, 1.0, rng, false);
        ad::ParamList params{{"input", x}};
        dense.collect_parameters("dense", params);
        run_case("dense.selu", [&] { return projection_loss(dense.forward(x), r); }, params, 0);
    }
    {
        layers::DenseLayer dense(5, 1, layers::Activation::sigmoid, rng);
        const auto x = random_tensor({4, 5}, -2.0, 2.0, rng, true);
        const std::vector<double> labels{1, 0, 1, 0};
        ad::ParamList params{{"input", x}};
        dense.collect_parameters("dense", params);
        run_case("dense.sigmoid_bce", [&] { return ad::bce_loss(ad::reshape(dense.forward(x), {4}), labels); },
                 params, 0);
    }
    {
        layers::MultiHeadAttention mha(1, 2, 8, rng);
        const auto x = random_tensor({3, 16, 1}, -2.0, 2.0, rng, true);
        const auto r = random_tensor({3, 16, 1}, -1.0, 1.0, rng, false);
        ad::ParamList params{{"input", x}};
        mha.collect_parameters("attention", params);
        run_case("attention.scalar_tokens", [&] { return projection_loss(mha.forward(x), r); }, params, 0);
    }
    {
        layers::MultiHeadAttention mha(6, 2, 3, rng);
        const auto x = random_tensor({3, 5, 6}, -2.0, 2.0, rng, true);
        const auto r = random_tensor({3, 5, 6}, -1.0, 1.0, rng, false);
        ad::ParamList params{{"input", x}};
        mha.collect_parameters("attention", params);
        run_case("attention.wide_tokens", [&] { return projection_loss(mha.forward(x), r); }, params, 0);
    }
    {
        layers::EncoderGeometry g;
        g.seq_len = 16;
        layers::EncoderBlock block(g, rng);
        const auto x = random_tensor({3, 16, 1}, -2.0, 2.0, rng, true);
        const auto r = random_tensor({3, 16, 1}, -1.0, 1.0, rng, false);
        ad::ParamList params{{"input", x}};
        block.collect_parameters("block", params);
        run_case("encoder.scalar_tokens", [&] { return projection_loss(block.forward(x, false, unused), r); },
                 params, 0);
    }
    {
        layers::EncoderGeometry g;
        g.seq_len = 5;
        g.token_dim = 6;
        g.head_dim = 3;
        layers::EncoderBlock block(g, rng);
        const auto x = random_tensor({3, 5, 6}, -2.0, 2.0, rng, true);
        const auto r = random_tensor({3, 5, 6}, -1.0, 1.0, rng, false);
        ad::ParamList params{{"input", x}};
        block.collect_parameters("block", params);
        run_case("encoder.wide_tokens", [&] { return projection_loss(block.forward(x, false, unused), r); },
                 params, 0);
    }
    for (const auto variant : {model::Variant::full, model::Variant::B, model::Variant::C}) {
        const model::GaitformerModel net(variant, derive_seed(seed, "grad_check.model"));
        const auto batch = random_tensor({2, model::kSensors, net.segment_length()}, 0.0, 1.0, rng, false);
        const std::vector<double> labels{1, 0};
        const std::size_t coords = variant == model::Variant::C ? 8 : 3;
        run_case("model." + std::string(model::variant_name(variant)),
                 [&] { return ad::bce_with_logits(net.forward_logits(batch, false, unused), labels); }, net.parameters(), coords,
                 kModelStep);
    }
    return cases;
}

} // namespace gaitformer::cli
