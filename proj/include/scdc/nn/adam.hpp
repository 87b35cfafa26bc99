#pragma once

#include <cstdint>
#include <vector>

#include "scdc/nn/tensor.hpp"

namespace scdc::nn {

struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::int64_t step_count = 0;
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;
};

/// One bias-corrected Adam update of `params` from their gradient buffers
/// (a parameter without a gradient buffer is treated as having zero gradient).
/// Moments are allocated on the first call.
void adam_step(std::vector<Tensor>& params, AdamState& state);

void zero_grads(std::vector<Tensor>& params);

}  // namespace scdc::nn
