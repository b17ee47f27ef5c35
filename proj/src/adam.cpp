#include "penn/adam.hpp"

#include <cmath>
#include <string>

#include "penn/errors.hpp"

namespace penn {

AdamState AdamState::for_params(std::span<const Tensor* const> params) {
    AdamState s;
    s.m.reserve(params.size());
    s.v.reserve(params.size());
    for (const Tensor* p : params) {
        s.m.push_back(p->zeros_like());
        s.v.push_back(p->zeros_like());
    }
    return s;
}

void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads,
               AdamState& state, double lr) {
    if (!(lr > 0.0)) throw ParameterError("adam_step: learning rate must be positive");
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        throw DimensionError("adam_step: " + std::to_string(params.size()) + " parameters, " +
                             std::to_string(grads.size()) + " gradients, " +
                             std::to_string(state.m.size()) + " moment slots");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i]->same_shape(*grads[i]) || !params[i]->same_shape(state.m[i])) {
            throw DimensionError("adam_step: parameter " + std::to_string(i) + " shape " +
                                 params[i]->shape_string() + " vs gradient " +
                                 grads[i]->shape_string());
        }
    }

    ++state.t;
    const double t = static_cast<double>(state.t);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);
    const double b1 = state.beta1;
    const double b2 = state.beta2;
    const double eps = state.epsilon;
    for (std::size_t i = 0; i < params.size(); ++i) {
        double* __restrict p = params[i]->data().data();
        const double* __restrict g = grads[i]->data().data();
        double* __restrict m = state.m[i].data().data();
        double* __restrict v = state.v[i].data().data();
        const std::size_t n = params[i]->size();
        for (std::size_t j = 0; j < n; ++j) {
            m[j] = b1 * m[j] + (1.0 - b1) * g[j];
            v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
            const double m_hat = m[j] / c1;
            const double v_hat = v[j] / c2;
            p[j] -= lr * m_hat / (std::sqrt(v_hat) + eps);
        }
    }
}

}  // namespace penn
