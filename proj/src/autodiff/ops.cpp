#include "gaitformer/autodiff/ops.hpp"

#include "gaitformer/errors.hpp"
#include "kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace gaitformer::ad {

namespace {

[[noreturn]] void shape_mismatch(const char* op, const Tensor& a, const Tensor& b) {
    throw ShapeError(std::string(op) + ": incompatible shapes " + shape_to_string(a.shape()) +
                     " and " + shape_to_string(b.shape()));
}

bool is_suffix(const Shape& small, const Shape& big) {
    if (small.size() > big.size()) {
        return false;
    }
    return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

enum class BinaryKind { add, sub, mul };

// Elementwise op where one operand may be repeated over leading dims.
Tensor binary(const char* name, BinaryKind kind, const Tensor& a, const Tensor& b) {
    const bool a_big = is_suffix(b.shape(), a.shape());
    if (!a_big && !is_suffix(a.shape(), b.shape())) {
        shape_mismatch(name, a, b);
    }
    const Shape out_shape = a_big ? a.shape() : b.shape();
    const std::size_t n = shape_size(out_shape);
    const std::size_t na = a.size();
    const std::size_t nb = b.size();
    const auto av = a.values();
    const auto bv = b.values();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = av[i % na];
        const double y = bv[i % nb];
        switch (kind) {
        case BinaryKind::add: out[i] = x + y; break;
        case BinaryKind::sub: out[i] = x - y; break;
        case BinaryKind::mul: out[i] = x * y; break;
        }
    }
    return Tensor::make_result(
        out_shape, std::move(out), {a, b},
        [a, b, kind, n, na, nb](const BackwardContext& ctx) {
            const auto& g = ctx.grad_output;
            auto ga = ctx.input_grads[0];
            auto gb = ctx.input_grads[1];
            const auto av = a.values();
            const auto bv = b.values();
            if (!ga.empty()) {
                for (std::size_t i = 0; i < n; ++i) {
                    ga[i % na] += kind == BinaryKind::mul ? g[i] * bv[i % nb] : g[i];
                }
            }
            if (!gb.empty()) {
                for (std::size_t i = 0; i < n; ++i) {
                    double d = g[i];
                    if (kind == BinaryKind::sub) {
                        d = -d;
                    } else if (kind == BinaryKind::mul) {
                        d *= av[i % na];
                    }
                    gb[i % nb] += d;
                }
            }
        },
        name);
}

// outer x axis_len x inner decomposition of a shape around one axis.
struct AxisSplit {
    std::size_t outer = 1;
    std::size_t length = 1;
    std::size_t inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
    AxisSplit s;
    for (std::size_t i = 0; i < axis; ++i) {
        s.outer *= shape[i];
    }
    s.length = shape[axis];
    for (std::size_t i = axis + 1; i < shape.size(); ++i) {
        s.inner *= shape[i];
    }
    return s;
}

} // namespace

Tensor add(const Tensor& a, const Tensor& b) { return binary("add", BinaryKind::add, a, b); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary("sub", BinaryKind::sub, a, b); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary("mul", BinaryKind::mul, a, b); }

Tensor scale(const Tensor& a, double c) {
    std::vector<double> out(a.values().begin(), a.values().end());
    for (auto& v : out) {
        v *= c;
    }
    return Tensor::make_result(
        a.shape(), std::move(out), {a},
        [c](const BackwardContext& ctx) {
            auto ga = ctx.input_grads[0];
            for (std::size_t i = 0; i < ga.size(); ++i) {
                ga[i] += c * ctx.grad_output[i];
            }
        },
        "scale");
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() == 0 || b.rank() < 2) {
        shape_mismatch("matmul", a, b);
    }
    const std::size_t k = a.shape().back();

    if (b.rank() == 2) {
        if (b.dim(0) != k) {
            shape_mismatch("matmul", a, b);
        }
        const std::size_t n = b.dim(1);
        const std::size_t rows = a.size() / k;
        Shape out_shape = a.shape();
        out_shape.back() = n;
        std::vector<double> out(rows * n, 0.0);
        kernels::gemm_nn(rows, k, n, a.values().data(), b.values().data(), out.data());
        return Tensor::make_result(
            std::move(out_shape), std::move(out), {a, b},
            [a, b, rows, k, n](const BackwardContext& ctx) {
                const double* g = ctx.grad_output.data();
                if (!ctx.input_grads[0].empty()) {
                    std::vector<double> scratch;
                    kernels::gemm_nt(rows, k, n, g, b.values().data(),
                                     ctx.input_grads[0].data(), scratch);
                }
                if (!ctx.input_grads[1].empty()) {
                    kernels::gemm_tn(rows, k, n, a.values().data(), g,
                                     ctx.input_grads[1].data());
                }
            },
            "matmul");
    }

    // Batched: identical leading dims.
    if (a.rank() != b.rank() || a.rank() < 3 ||
        !std::equal(a.shape().begin(), a.shape().end() - 2, b.shape().begin()) ||
        b.shape()[b.rank() - 2] != k) {
        shape_mismatch("matmul", a, b);
    }
    const std::size_t m = a.shape()[a.rank() - 2];
    const std::size_t n = b.shape().back();
    const std::size_t batches = a.size() / (m * k);
    Shape out_shape = a.shape();
    out_shape.back() = n;
    std::vector<double> out(batches * m * n, 0.0);
    for (std::size_t t = 0; t < batches; ++t) {
        kernels::gemm_nn(m, k, n, a.values().data() + t * m * k, b.values().data() + t * k * n,
                         out.data() + t * m * n);
    }
    return Tensor::make_result(
        std::move(out_shape), std::move(out), {a, b},
        [a, b, batches, m, k, n](const BackwardContext& ctx) {
            std::vector<double> scratch;
            for (std::size_t t = 0; t < batches; ++t) {
                const double* g = ctx.grad_output.data() + t * m * n;
                if (!ctx.input_grads[0].empty()) {
                    kernels::gemm_nt(m, k, n, g, b.values().data() + t * k * n,
                                     ctx.input_grads[0].data() + t * m * k, scratch);
                }
                if (!ctx.input_grads[1].empty()) {
                    kernels::gemm_tn(m, k, n, a.values().data() + t * m * k, g,
                                     ctx.input_grads[1].data() + t * k * n);
                }
            }
        },
        "matmul");
}

Tensor transpose(const Tensor& a) {
    if (a.rank() < 2) {
        throw ShapeError("transpose: need rank >= 2, got " + shape_to_string(a.shape()));
    }
    const std::size_t r = a.shape()[a.rank() - 2];
    const std::size_t c = a.shape().back();
    const std::size_t batches = a.size() / (r * c);
    Shape out_shape = a.shape();
    std::swap(out_shape[out_shape.size() - 2], out_shape.back());
    std::vector<double> out(a.size());
    const auto av = a.values();
    for (std::size_t t = 0; t < batches; ++t) {
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < c; ++j) {
                out[t * r * c + j * r + i] = av[t * r * c + i * c + j];
            }
        }
    }
    return Tensor::make_result(
        std::move(out_shape), std::move(out), {a},
        [batches, r, c](const BackwardContext& ctx) {
            auto ga = ctx.input_grads[0];
            for (std::size_t t = 0; t < batches; ++t) {
                for (std::size_t i = 0; i < r; ++i) {
                    for (std::size_t j = 0; j < c; ++j) {
                        ga[t * r * c + i * c + j] += ctx.grad_output[t * r * c + j * r + i];
                    }
                }
            }
        },
        "transpose");
}

Tensor reshape(const Tensor& a, Shape shape) {
    if (shape_size(shape) != a.size()) {
        throw ShapeError("reshape: cannot view " + shape_to_string(a.shape()) + " as " +
                         shape_to_string(shape));
    }
    std::vector<double> out(a.values().begin(), a.values().end());
    return Tensor::make_result(
        std::move(shape), std::move(out), {a},
        [](const BackwardContext& ctx) {
            auto ga = ctx.input_grads[0];
            for (std::size_t i = 0; i < ga.size(); ++i) {
                ga[i] += ctx.grad_output[i];
            }
        },
        "reshape");
}

Tensor flatten(const Tensor& a, std::size_t start_axis) {
    if (start_axis > a.rank()) {
        throw ShapeError("flatten: axis " + std::to_string(start_axis) + " out of range for " +
                         shape_to_string(a.shape()));
    }
    Shape shape(a.shape().begin(), a.shape().begin() + static_cast<std::ptrdiff_t>(start_axis));
    std::size_t rest = 1;
    for (std::size_t i = start_axis; i < a.rank(); ++i) {
        rest *= a.shape()[i];
    }
    shape.push_back(rest);
    return reshape(a, std::move(shape));
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
    if (parts.empty()) {
        throw ShapeError("concat: no inputs");
    }
    const Shape& first = parts.front().shape();
    if (axis >= first.size()) {
        throw ShapeError("concat: axis " + std::to_string(axis) + " out of range for " +
                         shape_to_string(first));
    }
    Shape out_shape = first;
    out_shape[axis] = 0;
    for (const auto& p : parts) {
        const Shape& s = p.shape();
        bool ok = s.size() == first.size();
        for (std::size_t d = 0; ok && d < s.size(); ++d) {
            ok = d == axis || s[d] == first[d];
        }
        if (!ok) {
            shape_mismatch("concat", parts.front(), p);
        }
        out_shape[axis] += s[axis];
    }
    const AxisSplit out_split = split_at(out_shape, axis);
    std::vector<double> out(shape_size(out_shape));
    std::vector<std::size_t> offsets;
    std::size_t offset = 0;
    for (const auto& p : parts) {
        offsets.push_back(offset);
        const std::size_t chunk = p.dim(axis) * out_split.inner;
        const auto pv = p.values();
        for (std::size_t o = 0; o < out_split.outer; ++o) {
            std::copy_n(pv.begin() + static_cast<std::ptrdiff_t>(o * chunk), chunk,
                        out.begin() +
                            static_cast<std::ptrdiff_t>(o * out_split.length * out_split.inner +
                                                        offset));
        }
        offset += chunk;
    }
    std::vector<std::size_t> chunks;
    for (const auto& p : parts) {
        chunks.push_back(p.dim(axis) * out_split.inner);
    }
    return Tensor::make_result(
        std::move(out_shape), std::move(out), parts,
        [out_split, offsets, chunks](const BackwardContext& ctx) {
            const std::size_t row = out_split.length * out_split.inner;
            for (std::size_t p = 0; p < chunks.size(); ++p) {
                auto gp = ctx.input_grads[p];
                if (gp.empty()) {
                    continue;
                }
                for (std::size_t o = 0; o < out_split.outer; ++o) {
                    for (std::size_t i = 0; i < chunks[p]; ++i) {
                        gp[o * chunks[p] + i] += ctx.grad_output[o * row + offsets[p] + i];
                    }
                }
            }
        },
        "concat");
}

Tensor slice(const Tensor& a, std::size_t axis, std::size_t start, std::size_t length) {
    if (axis >= a.rank() || start + length > a.dim(axis)) {
        throw ShapeError("slice: range [" + std::to_string(start) + ", " +
                         std::to_string(start + length) + ") on axis " + std::to_string(axis) +
                         " is outside " + shape_to_string(a.shape()));
    }
    const AxisSplit in = split_at(a.shape(), axis);
    Shape out_shape = a.shape();
    out_shape[axis] = length;
    const std::size_t chunk = length * in.inner;
    const std::size_t row = in.length * in.inner;
    const std::size_t first = start * in.inner;
    std::vector<double> out(in.outer * chunk);
    const auto av = a.values();
    for (std::size_t o = 0; o < in.outer; ++o) {
        std::copy_n(av.begin() + static_cast<std::ptrdiff_t>(o * row + first), chunk,
                    out.begin() + static_cast<std::ptrdiff_t>(o * chunk));
    }
    return Tensor::make_result(
        std::move(out_shape), std::move(out), {a},
        [outer = in.outer, chunk, row, first](const BackwardContext& ctx) {
            auto ga = ctx.input_grads[0];
            for (std::size_t o = 0; o < outer; ++o) {
                for (std::size_t i = 0; i < chunk; ++i) {
                    ga[o * row + first + i] += ctx.grad_output[o * chunk + i];
                }
            }
        },
        "slice");
}

Tensor sum(const Tensor& a) {
    double total = 0.0;
    for (const double v : a.values()) {
        total += v;
    }
    return Tensor::make_result(
        Shape{}, {total}, {a},
        [](const BackwardContext& ctx) {
            const double g = ctx.grad_output[0];
            for (auto& v : ctx.input_grads[0]) {
                v += g;
            }
        },
        "sum");
}

Tensor mean(const Tensor& a) {
    if (a.size() == 0) {
        throw ShapeError("mean of an empty tensor");
    }
    return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor softmax(const Tensor& a, std::size_t axis) {
    if (axis >= a.rank()) {
        throw ShapeError("softmax: axis " + std::to_string(axis) + " out of range for " +
                         shape_to_string(a.shape()));
    }
    const AxisSplit s = split_at(a.shape(), axis);
    const auto av = a.values();
    std::vector<double> out(a.size());
    for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t in = 0; in < s.inner; ++in) {
            const std::size_t base = o * s.length * s.inner + in;
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < s.length; ++j) {
                mx = std::max(mx, av[base + j * s.inner]);
            }
            double total = 0.0;
            for (std::size_t j = 0; j < s.length; ++j) {
                const double e = std::exp(av[base + j * s.inner] - mx);
                out[base + j * s.inner] = e;
                total += e;
            }
            for (std::size_t j = 0; j < s.length; ++j) {
                out[base + j * s.inner] /= total;
            }
        }
    }
    return Tensor::make_result(
        a.shape(), std::move(out), {a},
        [s](const BackwardContext& ctx) {
            const auto& y = ctx.output;
            const auto& g = ctx.grad_output;
            auto ga = ctx.input_grads[0];
            for (std::size_t o = 0; o < s.outer; ++o) {
                for (std::size_t in = 0; in < s.inner; ++in) {
                    const std::size_t base = o * s.length * s.inner + in;
                    double dot = 0.0;
                    for (std::size_t j = 0; j < s.length; ++j) {
                        dot += g[base + j * s.inner] * y[base + j * s.inner];
                    }
                    for (std::size_t j = 0; j < s.length; ++j) {
                        const std::size_t idx = base + j * s.inner;
                        ga[idx] += y[idx] * (g[idx] - dot);
                    }
                }
            }
        },
        "softmax");
}

Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& offset, double epsilon) {
    if (a.rank() == 0) {
        throw ShapeError("layer_norm: scalar input");
    }
    const std::size_t n = a.shape().back();
    if (gain.size() != n || offset.size() != n) {
        throw ShapeError("layer_norm: gain " + shape_to_string(gain.shape()) + " / offset " +
                         shape_to_string(offset.shape()) + " do not match input " +
                         shape_to_string(a.shape()));
    }
    const std::size_t rows = a.size() / n;
    const auto av = a.values();
    const auto gv = gain.values();
    const auto bv = offset.values();
    std::vector<double> xhat(a.size());
    std::vector<double> inv_std(rows);
    std::vector<double> out(a.size());
    for (std::size_t r = 0; r < rows; ++r) {
        const double* x = av.data() + r * n;
        double mu = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            mu += x[j];
        }
        mu /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            var += (x[j] - mu) * (x[j] - mu);
        }
        var /= static_cast<double>(n);
        const double is = 1.0 / std::sqrt(var + epsilon);
        inv_std[r] = is;
        for (std::size_t j = 0; j < n; ++j) {
            const double h = (x[j] - mu) * is;
            xhat[r * n + j] = h;
            out[r * n + j] = gv[j] * h + bv[j];
        }
    }
    return Tensor::make_result(
        a.shape(), std::move(out), {a, gain, offset},
        [gain, xhat = std::move(xhat), inv_std = std::move(inv_std), rows,
         n](const BackwardContext& ctx) {
            const auto& g = ctx.grad_output;
            const auto gv = gain.values();
            auto ga = ctx.input_grads[0];
            auto ggain = ctx.input_grads[1];
            auto goff = ctx.input_grads[2];
            const double inv_n = 1.0 / static_cast<double>(n);
            for (std::size_t r = 0; r < rows; ++r) {
                const double* gr = g.data() + r * n;
                const double* hr = xhat.data() + r * n;
                if (!ggain.empty() || !goff.empty()) {
                    for (std::size_t j = 0; j < n; ++j) {
                        if (!ggain.empty()) {
                            ggain[j] += gr[j] * hr[j];
                        }
                        if (!goff.empty()) {
                            goff[j] += gr[j];
                        }
                    }
                }
                if (!ga.empty()) {
                    double mean_dh = 0.0;
                    double mean_dh_h = 0.0;
                    for (std::size_t j = 0; j < n; ++j) {
                        const double dh = gr[j] * gv[j];
                        mean_dh += dh;
                        mean_dh_h += dh * hr[j];
                    }
                    mean_dh *= inv_n;
                    mean_dh_h *= inv_n;
                    for (std::size_t j = 0; j < n; ++j) {
                        const double dh = gr[j] * gv[j];
                        ga[r * n + j] += inv_std[r] * (dh - mean_dh - hr[j] * mean_dh_h);
                    }
                }
            }
        },
        "layer_norm");
}

Tensor selu(const Tensor& a) {
    std::vector<double> out(a.size());
    const auto av = a.values();
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double x = av[i];
        out[i] = x > 0.0 ? kSeluLambda * x : kSeluLambda * kSeluAlpha * std::expm1(x);
    }
    return Tensor::make_result(
        a.shape(), std::move(out), {a},
        [a](const BackwardContext& ctx) {
            const auto av = a.values();
            auto ga = ctx.input_grads[0];
            for (std::size_t i = 0; i < ga.size(); ++i) {
                // For x <= 0, d/dx = lambda*alpha*e^x = y + lambda*alpha.
                const double d = av[i] > 0.0 ? kSeluLambda
                                             : ctx.output[i] + kSeluLambda * kSeluAlpha;
                ga[i] += d * ctx.grad_output[i];
            }
        },
        "selu");
}

Tensor sigmoid(const Tensor& a) {
    constexpr double lo = std::numeric_limits<double>::min();
    const double hi = std::nextafter(1.0, 0.0);
    std::vector<double> out(a.size());
    const auto av = a.values();
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double x = av[i];
        double s;
        if (x >= 0.0) {
            s = 1.0 / (1.0 + std::exp(-x));
        } else {
            const double e = std::exp(x);
            s = e / (1.0 + e);
        }
        out[i] = std::clamp(s, lo, hi);
    }
    return Tensor::make_result(
        a.shape(), std::move(out), {a},
        [](const BackwardContext& ctx) {
            auto ga = ctx.input_grads[0];
            for (std::size_t i = 0; i < ga.size(); ++i) {
                const double s = ctx.output[i];
                ga[i] += s * (1.0 - s) * ctx.grad_output[i];
            }
        },
        "sigmoid");
}

Tensor dropout(const Tensor& a, double rate, bool training, Rng& rng) {
    if (!(rate >= 0.0 && rate < 1.0)) {
        throw Error("dropout: rate must be in [0, 1), got " + std::to_string(rate));
    }
    if (!training || rate == 0.0) {
        return a;
    }
    const double keep_scale = 1.0 / (1.0 - rate);
    std::vector<double> mask(a.size());
    for (auto& m : mask) {
        m = rng.uniform() < rate ? 0.0 : keep_scale;
    }
    std::vector<double> out(a.size());
    const auto av = a.values();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = av[i] * mask[i];
    }
    return Tensor::make_result(
        a.shape(), std::move(out), {a},
        [mask = std::move(mask)](const BackwardContext& ctx) {
            auto ga = ctx.input_grads[0];
            for (std::size_t i = 0; i < ga.size(); ++i) {
                ga[i] += mask[i] * ctx.grad_output[i];
            }
        },
        "dropout");
}

Tensor bce_loss(const Tensor& p, std::span<const double> labels) {
    if (labels.size() != p.size() || p.size() == 0) {
        throw ShapeError("bce_loss: " + std::to_string(labels.size()) + " labels for predictions " +
                         shape_to_string(p.shape()));
    }
    const auto pv = p.values();
    const double n = static_cast<double>(p.size());
    double total = 0.0;
    for (std::size_t i = 0; i < pv.size(); ++i) {
        const double y = labels[i];
        if (y != 0.0 && y != 1.0) {
            throw Error("bce_loss: labels must be 0 or 1");
        }
        const double q = std::clamp(pv[i], kBceEpsilon, 1.0 - kBceEpsilon);
        total -= y * std::log(q) + (1.0 - y) * std::log(1.0 - q);
    }
    std::vector<double> y(labels.begin(), labels.end());
    return Tensor::make_result(
        Shape{}, {total / n}, {p},
        [p, y = std::move(y), n](const BackwardContext& ctx) {
            const auto pv = p.values();
            auto gp = ctx.input_grads[0];
            const double g = ctx.grad_output[0] / n;
            for (std::size_t i = 0; i < gp.size(); ++i) {
                const double raw = pv[i];
                if (raw < kBceEpsilon || raw > 1.0 - kBceEpsilon) {
                    continue;
                }
                gp[i] += g * (-y[i] / raw + (1.0 - y[i]) / (1.0 - raw));
            }
        },
        "bce_loss");
}

Tensor bce_with_logits(const Tensor& z, std::span<const double> labels) {
    if (labels.size() != z.size() || z.size() == 0) {
        throw ShapeError("bce_with_logits: " + std::to_string(labels.size()) + " labels for logits " +
                         shape_to_string(z.shape()));
    }
    static const double limit = std::log((1.0 - kBceEpsilon) / kBceEpsilon);
    const auto zv = z.values();
    const double n = static_cast<double>(z.size());
    double total = 0.0;
    for (std::size_t i = 0; i < zv.size(); ++i) {
        const double y = labels[i];
        if (y != 0.0 && y != 1.0) {
            throw Error("bce_with_logits: labels must be 0 or 1");
        }
        const double x = std::clamp(zv[i], -limit, limit);
        total += std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))) - y * x;
    }
    std::vector<double> y(labels.begin(), labels.end());
    return Tensor::make_result(
        Shape{}, {total / n}, {z},
        [z, y = std::move(y), n](const BackwardContext& ctx) {
            const auto zv = z.values();
            auto gz = ctx.input_grads[0];
            const double g = ctx.grad_output[0] / n;
            for (std::size_t i = 0; i < gz.size(); ++i) {
                const double x = zv[i];
                if (std::abs(x) > limit) {
                    continue;
                }
                const double e = std::exp(-std::abs(x));
                const double s = x >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
                gz[i] += g * (s - y[i]);
            }
        },
        "bce_with_logits");
}

} // namespace gaitformer::ad
