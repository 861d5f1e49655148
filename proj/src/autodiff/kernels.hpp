#pragma once

// Plain row-major dense kernels. Loops are ordered so the innermost loop runs
// over contiguous memory and vectorizes without relaxed FP semantics.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace gaitformer::ad::kernels {

// C[M,N] += A[M,K] * B[K,N]
inline void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a,
                    const double* b, double* c) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        const double* arow = a + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += av * brow[j];
            }
        }
    }
}

// C[K,N] += A[M,K]^T * G[M,N]
inline void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const double* a,
                    const double* g, double* c) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        const double* grow = g + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            double* crow = c + p * n;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += av * grow[j];
            }
        }
    }
}

// C[M,K] += G[M,N] * B[K,N]^T, via a transposed copy of B.
inline void gemm_nt(std::size_t m, std::size_t k, std::size_t n, const double* g,
                    const double* b, double* c, std::vector<double>& scratch) {
    scratch.resize(n * k);
    for (std::size_t p = 0; p < k; ++p) {
        for (std::size_t j = 0; j < n; ++j) {
            scratch[j * k + p] = b[p * n + j];
        }
    }
    gemm_nn(m, n, k, g, scratch.data(), c);
}

// exp(x) for x <= 709, written so the loop vectorizes. Range reduction
// x = k ln2 + r with |r| <= ln2/2, then a degree-13 Taylor polynomial; within
// a few ulp of std::exp. Inputs below -708 return exp(-708) instead of
// underflowing.
inline double exp_kernel(double x) {
    constexpr double kLog2e = 1.4426950408889634074;
    constexpr double kLn2Hi = 6.93147180369123816490e-01;
    constexpr double kLn2Lo = 1.90821492927058770002e-10;
    constexpr double kShift = 0x1.8p52;
    x = x < -708.0 ? -708.0 : x;
    const double t = x * kLog2e + kShift;
    const double kf = t - kShift;
    const double r = (x - kf * kLn2Hi) - kf * kLn2Lo;
    double p = 1.0 / 6227020800.0;
    p = p * r + 1.0 / 479001600.0;
    p = p * r + 1.0 / 39916800.0;
    p = p * r + 1.0 / 3628800.0;
    p = p * r + 1.0 / 362880.0;
    p = p * r + 1.0 / 40320.0;
    p = p * r + 1.0 / 5040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;
    const std::int64_t k = std::bit_cast<std::int64_t>(t) - std::bit_cast<std::int64_t>(kShift);
    // Split 2^k in two factors so k = 1024 (x just below 709.8) stays finite.
    const double half = std::bit_cast<double>((k / 2 + 1023) << 52);
    const double rest = std::bit_cast<double>((k - k / 2 + 1023) << 52);
    return p * half * rest;
}

inline void exp_inplace(double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = exp_kernel(x[i]);
    }
}

} // namespace gaitformer::ad::kernels
