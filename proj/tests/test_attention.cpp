#include "gaitformer/autodiff/ops.hpp"
#include "gaitformer/layers.hpp"
#include "gaitformer/errors.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gaitformer;
using ad::Tensor;
using gaitformer::testing::numeric_gradient;
using gaitformer::testing::random_tensor;

namespace {

// softmax(q k^T * scale) v from primitive ops.
Tensor composed_attention(const Tensor& q, const Tensor& k, const Tensor& v, double scale) {
    const auto scores = ad::scale(ad::matmul(q, ad::transpose(k)), scale);
    return ad::matmul(ad::softmax(scores, scores.rank() - 1), v);
}

// Brute-force z_i = sum_j softmax_j(c x_i x_j) x_j for one sequence.
std::vector<double> brute_scalar_attention(const std::vector<double>& x, double c) {
    std::vector<double> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double total = 0, acc = 0;
        for (const double xj : x) {
            const double w = std::exp(c * x[i] * xj);
            total += w;
            acc += w * xj;
        }
        z[i] = acc / total;
    }
    return z;
}

} // namespace

TEST(Attention, FusedMatchesComposed) {
    Rng rng(1);
    const auto q = random_tensor({2, 5, 4}, rng);
    const auto k = random_tensor({2, 6, 4}, rng);
    const auto v = random_tensor({2, 6, 3}, rng);
    const auto fused = ad::attention(q, k, v, 0.5);
    const auto ref = composed_attention(q, k, v, 0.5);
    ASSERT_EQ(fused.shape(), ref.shape());
    for (std::size_t i = 0; i < fused.size(); ++i) EXPECT_NEAR(fused.at(i), ref.at(i), 1e-14);
}

TEST(Attention, FusedGradientsMatchComposed) {
    Rng rng(2);
    auto q1 = random_tensor({2, 4, 3}, rng, -1, 1, true);
    auto k1 = random_tensor({2, 4, 3}, rng, -1, 1, true);
    auto v1 = random_tensor({2, 4, 2}, rng, -1, 1, true);
    auto q2 = q1.detach(), k2 = k1.detach(), v2 = v1.detach();
    q2.set_requires_grad(true);
    k2.set_requires_grad(true);
    v2.set_requires_grad(true);
    const auto r = random_tensor({2, 4, 2}, rng);
    ad::sum(ad::mul(ad::attention(q1, k1, v1, 0.7), r)).backward();
    ad::sum(ad::mul(composed_attention(q2, k2, v2, 0.7), r)).backward();
    for (std::size_t i = 0; i < q1.size(); ++i) EXPECT_NEAR(q1.grad()[i], q2.grad()[i], 1e-13);
    for (std::size_t i = 0; i < k1.size(); ++i) EXPECT_NEAR(k1.grad()[i], k2.grad()[i], 1e-13);
    for (std::size_t i = 0; i < v1.size(); ++i) EXPECT_NEAR(v1.grad()[i], v2.grad()[i], 1e-13);
}

TEST(Attention, ScalarTokenMatchesBruteForce) {
    Rng rng(3);
    for (const double c : {-2.0, -0.3, 0.0, 0.4, 3.0}) {
        const auto x = random_tensor({3, 9}, rng, -2, 2);
        const auto z = ad::scalar_token_attention(x, Tensor::scalar(c));
        for (std::size_t b = 0; b < 3; ++b) {
            const std::vector<double> row(x.values().begin() + b * 9, x.values().begin() + (b + 1) * 9);
            const auto expected = brute_scalar_attention(row, c);
            for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(z.at(b * 9 + i), expected[i], 1e-13);
        }
    }
}

TEST(Attention, ScalarTokenGradientsMatchFiniteDifferences) {
    Rng rng(4);
    auto x = random_tensor({2, 7}, rng, -2, 2, true);
    auto c = Tensor::scalar(0.8, true);
    const auto r = random_tensor({2, 7}, rng);
    const auto loss = [&] { return ad::sum(ad::mul(ad::scalar_token_attention(x, c), r)); };
    loss().backward();
    const auto gx = numeric_gradient([&] { return loss().item(); }, x);
    const auto gc = numeric_gradient([&] { return loss().item(); }, c);
    for (std::size_t i = 0; i < gx.size(); ++i) EXPECT_NEAR(x.grad()[i], gx[i], 1e-8);
    EXPECT_NEAR(c.grad()[0], gc[0], 1e-8);
}

TEST(Attention, ScalarTokenWeightsAreRowStochastic) {
    Rng rng(5);
    const auto x = random_tensor({2, 6}, rng, -3, 3);
    const auto w = ad::scalar_token_attention_weights(x, 1.7);
    ASSERT_EQ(w.shape(), (ad::Shape{2, 6, 6}));
    for (std::size_t r = 0; r < 12; ++r) {
        double total = 0;
        for (std::size_t j = 0; j < 6; ++j) {
            EXPECT_GE(w.at(r * 6 + j), 0.0);
            total += w.at(r * 6 + j);
        }
        EXPECT_NEAR(total, 1.0, 1e-14);
    }
}

// Property: the rank-one fast path equals the generic multi-head attention for
// random scalar-token inputs and weights.
TEST(Attention, FastPathEqualsReferenceProperty) {
    Rng rng(6);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t len = 2 + rng.below(40);
        const std::size_t batch = 1 + rng.below(4);
        const std::size_t heads = 1 + rng.below(3);
        const std::size_t head_dim = 1 + rng.below(9);
        layers::MultiHeadAttention mha(1, heads, head_dim, rng);
        const auto x = random_tensor({batch, len, 1}, rng, -3, 3);
        const auto fast = mha.forward(x);
        const auto ref = mha.forward_reference(x);
        ASSERT_EQ(fast.shape(), ref.shape());
        for (std::size_t i = 0; i < fast.size(); ++i) {
            ASSERT_NEAR(fast.at(i), ref.at(i), 1e-12) << "trial " << trial;
        }
    }
}

TEST(Attention, FastPathGradientsEqualReference) {
    Rng rng(7);
    layers::MultiHeadAttention mha(1, 2, 8, rng);
    ad::ParamList params;
    mha.collect_parameters("mha", params);
    const auto x = random_tensor({3, 20, 1}, rng, -2, 2, true);
    const auto r = random_tensor({3, 20, 1}, rng);
    ad::sum(ad::mul(mha.forward(x), r)).backward();
    std::vector<std::vector<double>> fast;
    for (auto& p : params) {
        fast.emplace_back(p.tensor.grad().begin(), p.tensor.grad().end());
        p.tensor.zero_grad();
    }
    const std::vector<double> fast_x(x.grad().begin(), x.grad().end());
    auto xr = x;
    xr.zero_grad();
    ad::sum(ad::mul(mha.forward_reference(x), r)).backward();
    for (std::size_t k = 0; k < params.size(); ++k) {
        for (std::size_t i = 0; i < fast[k].size(); ++i) {
            EXPECT_NEAR(fast[k][i], params[k].tensor.grad()[i], 1e-11) << params[k].name;
        }
    }
    for (std::size_t i = 0; i < fast_x.size(); ++i) EXPECT_NEAR(fast_x[i], x.grad()[i], 1e-11);
}

TEST(Attention, HeadWeightsRowStochastic) {
    Rng rng(8);
    layers::MultiHeadAttention mha(4, 2, 3, rng);
    const auto x = random_tensor({2, 5, 4}, rng);
    const auto w = mha.attention_weights(x, 1);
    ASSERT_EQ(w.shape(), (ad::Shape{2, 5, 5}));
    for (std::size_t r = 0; r < 10; ++r) {
        double total = 0;
        for (std::size_t j = 0; j < 5; ++j) total += w.at(r * 5 + j);
        EXPECT_NEAR(total, 1.0, 1e-14);
    }
    EXPECT_THROW(mha.attention_weights(x, 2), Error);
}
