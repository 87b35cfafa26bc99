#pragma once

#include <span>

#include "scdc/nn/tensor.hpp"

namespace scdc::nn {

// Elementwise (identical shapes).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor exp(const Tensor& a);
/// log(max(a, floor)); the gradient is zero where the floor is active.
Tensor log_floor(const Tensor& a, double floor = 1e-12);
Tensor relu(const Tensor& a);

// Reductions.
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/// [m, n] -> [m]
Tensor sum_rows(const Tensor& a);
/// [m, n] -> [n]
Tensor sum_cols(const Tensor& a);

// Matrix.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
/// Stacks [m1, n] over [m2, n].
Tensor concat_rows(const Tensor& a, const Tensor& b);
/// Divides each row by max(||row||, eps).
Tensor normalize_rows(const Tensor& a, double eps = 1e-12);
Tensor reshape(const Tensor& a, Shape shape);
/// log(sum_j mask[i, j] * exp(a[i, j])) per row, evaluated stably. `mask` is a
/// 0/1 constant of the same shape; every row must select at least one entry.
Tensor logsumexp_rows(const Tensor& a, const Tensor& mask);
/// Row-wise softmax with per-row max subtraction.
Tensor softmax_rows(const Tensor& a);

// Layers.
/// input [B, D], weight [D, E], bias [E] -> [B, E]
Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias);
/// input [B, Cin, L], weight [Cout, Cin, K], bias [Cout] -> [B, Cout, L'],
/// L' = (L + 2 padding - K) / stride + 1. Cross-correlation.
Tensor conv1d(const Tensor& input, const Tensor& weight, const Tensor& bias, std::size_t stride = 1,
              std::size_t padding = 0);

struct BatchNormState {
    std::span<double> running_mean;
    std::span<double> running_var;
    double momentum = 0.1;
    double eps = 1e-5;
};

enum class Mode { train, eval };

/// Per-channel normalization over (B, L). Train mode uses batch statistics and
/// updates the running ones; eval mode uses the running statistics.
Tensor batchnorm1d(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                   BatchNormState state, Mode mode);

/// Non-overlapping max over windows along the last axis of [B, C, L]; the
/// gradient goes to the first maximal element of each window.
Tensor maxpool1d(const Tensor& input, std::size_t window);

}  // namespace scdc::nn
