#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "penn/tensor.hpp"

namespace penn {

/// Moment estimates for Adam, one pair per parameter tensor.
struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::int64_t t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    /// Zero moments shaped like `params`.
    static AdamState for_params(std::span<const Tensor* const> params);
};

/// One bias-corrected Adam update, in place. Increments state.t.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads,
               AdamState& state, double lr);

}  // namespace penn
