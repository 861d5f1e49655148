#include "gaitformer/autodiff/ops.hpp"

#include "gaitformer/errors.hpp"
#include "kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gaitformer::ad {

namespace {

void softmax_rows(double* s, std::size_t rows, std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i) {
        double* row = s + i * cols;
        const double mx = *std::max_element(row, row + cols);
        double total = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            row[j] -= mx;
        }
        kernels::exp_inplace(row, cols);
        for (std::size_t j = 0; j < cols; ++j) {
            total += row[j];
        }
        const double inv = 1.0 / total;
        for (std::size_t j = 0; j < cols; ++j) {
            row[j] *= inv;
        }
    }
}

// Row i of softmax_j(coeff * x_i * x_j) into row[0..len).
void scalar_token_row(const double* x, std::size_t len, double a, double xmax, double xmin,
                      double* row) {
    const double mx = a >= 0.0 ? a * xmax : a * xmin;
    for (std::size_t j = 0; j < len; ++j) {
        row[j] = a * x[j] - mx;
    }
    kernels::exp_inplace(row, len);
    double total = 0.0;
    for (std::size_t j = 0; j < len; ++j) {
        total += row[j];
    }
    const double inv = 1.0 / total;
    for (std::size_t j = 0; j < len; ++j) {
        row[j] *= inv;
    }
}

void scalar_token_weights(const double* x, std::size_t len, double coeff, double* weights) {
    const double xmax = *std::max_element(x, x + len);
    const double xmin = *std::min_element(x, x + len);
    for (std::size_t i = 0; i < len; ++i) {
        scalar_token_row(x, len, coeff * x[i], xmax, xmin, weights + i * len);
    }
}

} // namespace

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, double scale) {
    if (q.rank() < 2 || k.rank() != q.rank() || v.rank() != q.rank()) {
        throw ShapeError("attention: q " + shape_to_string(q.shape()) + ", k " +
                         shape_to_string(k.shape()) + ", v " + shape_to_string(v.shape()));
    }
    const std::size_t lq = q.shape()[q.rank() - 2];
    const std::size_t d = q.shape().back();
    const std::size_t lk = k.shape()[k.rank() - 2];
    const std::size_t dv = v.shape().back();
    const std::size_t batches = q.size() / (lq * d);
    const bool leading_ok = std::equal(q.shape().begin(), q.shape().end() - 2, k.shape().begin()) &&
                            std::equal(q.shape().begin(), q.shape().end() - 2, v.shape().begin());
    if (!leading_ok || k.shape().back() != d || v.shape()[v.rank() - 2] != lk) {
        throw ShapeError("attention: q " + shape_to_string(q.shape()) + ", k " +
                         shape_to_string(k.shape()) + ", v " + shape_to_string(v.shape()));
    }

    std::vector<double> weights(batches * lq * lk, 0.0);
    std::vector<double> out(batches * lq * dv, 0.0);
    std::vector<double> scratch;
    for (std::size_t t = 0; t < batches; ++t) {
        double* w = weights.data() + t * lq * lk;
        kernels::gemm_nt(lq, lk, d, q.values().data() + t * lq * d,
                         k.values().data() + t * lk * d, w, scratch);
        for (std::size_t i = 0; i < lq * lk; ++i) {
            w[i] *= scale;
        }
        softmax_rows(w, lq, lk);
        kernels::gemm_nn(lq, lk, dv, w, v.values().data() + t * lk * dv,
                         out.data() + t * lq * dv);
    }

    Shape out_shape = q.shape();
    out_shape.back() = dv;
    return Tensor::make_result(
        std::move(out_shape), std::move(out), {q, k, v},
        [q, k, v, weights = std::move(weights), batches, lq, lk, d, dv,
         scale](const BackwardContext& ctx) {
            std::vector<double> dw(lq * lk);
            std::vector<double> scratch;
            for (std::size_t t = 0; t < batches; ++t) {
                const double* w = weights.data() + t * lq * lk;
                const double* g = ctx.grad_output.data() + t * lq * dv;
                if (!ctx.input_grads[2].empty()) {
                    kernels::gemm_tn(lq, lk, dv, w, g, ctx.input_grads[2].data() + t * lk * dv);
                }
                if (ctx.input_grads[0].empty() && ctx.input_grads[1].empty()) {
                    continue;
                }
                std::fill(dw.begin(), dw.end(), 0.0);
                kernels::gemm_nt(lq, lk, dv, g, v.values().data() + t * lk * dv, dw.data(),
                                 scratch);
                // Softmax backward, then the score scale.
                for (std::size_t i = 0; i < lq; ++i) {
                    double dot = 0.0;
                    for (std::size_t j = 0; j < lk; ++j) {
                        dot += dw[i * lk + j] * w[i * lk + j];
                    }
                    for (std::size_t j = 0; j < lk; ++j) {
                        dw[i * lk + j] = scale * w[i * lk + j] * (dw[i * lk + j] - dot);
                    }
                }
                if (!ctx.input_grads[0].empty()) {
                    kernels::gemm_nn(lq, lk, d, dw.data(), k.values().data() + t * lk * d,
                                     ctx.input_grads[0].data() + t * lq * d);
                }
                if (!ctx.input_grads[1].empty()) {
                    kernels::gemm_tn(lq, lk, d, dw.data(), q.values().data() + t * lq * d,
                                     ctx.input_grads[1].data() + t * lk * d);
                }
            }
        },
        "attention");
}

Tensor scalar_token_attention(const Tensor& x, const Tensor& coeff) {
    if (x.rank() == 0 || coeff.size() != 1) {
        throw ShapeError("scalar_token_attention: x " + shape_to_string(x.shape()) + ", coeff " +
                         shape_to_string(coeff.shape()));
    }
    const std::size_t len = x.shape().back();
    const std::size_t batches = x.size() / len;
    const double c = coeff.item();
    const auto xv = x.values();

    // Weight rows are recomputed in backward rather than stored.
    std::vector<double> row(len);
    std::vector<double> out(x.size(), 0.0);
    for (std::size_t t = 0; t < batches; ++t) {
        const double* xs = xv.data() + t * len;
        const double xmax = *std::max_element(xs, xs + len);
        const double xmin = *std::min_element(xs, xs + len);
        for (std::size_t i = 0; i < len; ++i) {
            scalar_token_row(xs, len, c * xs[i], xmax, xmin, row.data());
            double z = 0.0;
            for (std::size_t j = 0; j < len; ++j) {
                z += row[j] * xs[j];
            }
            out[t * len + i] = z;
        }
    }

    return Tensor::make_result(
        x.shape(), std::move(out), {x, coeff},
        [x, c, batches, len](const BackwardContext& ctx) {
            const auto xv = x.values();
            auto gx = ctx.input_grads[0];
            auto gc = ctx.input_grads[1];
            double dc = 0.0;
            std::vector<double> dx(len);
            std::vector<double> row(len);
            for (std::size_t t = 0; t < batches; ++t) {
                const double* xs = xv.data() + t * len;
                const double* zs = ctx.output.data() + t * len;
                const double* gs = ctx.grad_output.data() + t * len;
                const double xmax = *std::max_element(xs, xs + len);
                const double xmin = *std::min_element(xs, xs + len);
                std::fill(dx.begin(), dx.end(), 0.0);
                for (std::size_t i = 0; i < len; ++i) {
                    const double gi = gs[i];
                    if (gi == 0.0) {
                        continue;
                    }
                    const double xi = xs[i];
                    const double zi = zs[i];
                    const double cxi = c * xi;
                    scalar_token_row(xs, len, cxi, xmax, xmin, row.data());
                    // ds_ij = A_ij * g_i * (x_j - z_i); score_ij = c * x_i * x_j.
                    double row_acc = 0.0;
                    for (std::size_t j = 0; j < len; ++j) {
                        const double t_ij = row[j] * gi;
                        const double ds = t_ij * (xs[j] - zi);
                        dx[j] += t_ij + cxi * ds;
                        row_acc += ds * xs[j];
                    }
                    dx[i] += c * row_acc;
                    dc += xi * row_acc;
                }
                if (!gx.empty()) {
                    for (std::size_t j = 0; j < len; ++j) {
                        gx[t * len + j] += dx[j];
                    }
                }
            }
            if (!gc.empty()) {
                gc[0] += dc;
            }
        },
        "scalar_token_attention");
}

Tensor scalar_token_attention_weights(const Tensor& x, double coeff) {
    if (x.rank() == 0) {
        throw ShapeError("scalar_token_attention_weights: scalar input");
    }
    const std::size_t len = x.shape().back();
    const std::size_t batches = x.size() / len;
    std::vector<double> weights(batches * len * len);
    for (std::size_t t = 0; t < batches; ++t) {
        scalar_token_weights(x.values().data() + t * len, len, coeff,
                             weights.data() + t * len * len);
    }
    Shape shape = x.shape();
    shape.push_back(len);
    return Tensor::from(std::move(shape), std::move(weights));
}

} // namespace gaitformer::ad
