#include "scdc/nn/adam.hpp"

#include <cmath>

namespace scdc::nn {

void adam_step(std::vector<Tensor>& params, AdamState& state) {
    if (state.first_moment.empty()) {
        for (const auto& p : params) {
            state.first_moment.emplace_back(p.size(), 0.0);
            state.second_moment.emplace_back(p.size(), 0.0);
        }
    }
    if (state.first_moment.size() != params.size()) {
        throw ShapeError("adam_step: parameter count changed between steps");
    }
    ++state.step_count;
    const auto t = static_cast<double>(state.step_count);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto& p = params[k];
        auto& m = state.first_moment[k];
        auto& v = state.second_moment[k];
        if (m.size() != p.size()) throw ShapeError("adam_step: moment shape mismatch");
        auto w = p.values();
        const bool has = p.has_grad();
        const auto g = has ? std::span<const double>(p.grad()) : std::span<const double>();
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double gi = has ? g[i] : 0.0;
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * gi;
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * gi * gi;
            w[i] -= state.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + state.eps);
        }
    }
}

void zero_grads(std::vector<Tensor>& params) {
    for (auto& p : params) p.zero_grad();
}

}  // namespace scdc::nn
