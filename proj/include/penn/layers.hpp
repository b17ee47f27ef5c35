#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "penn/tape.hpp"
#include "penn/tensor.hpp"

namespace penn {

/// Fully connected layer, y = W x + b.
struct DenseLayer {
    Tensor weights;  ///< [out x in]
    Tensor bias;     ///< [out]

    DenseLayer() = default;
    DenseLayer(std::size_t in_dim, std::size_t out_dim)
        : weights(out_dim, in_dim), bias(out_dim) {}

    std::size_t in_dim() const noexcept { return weights.cols(); }
    std::size_t out_dim() const noexcept { return weights.rows(); }
    /// (in + 1) * out
    std::size_t param_count() const noexcept { return (in_dim() + 1) * out_dim(); }

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// A DenseLayer's weights and bias registered as tape parameters.
struct LayerVars {
    Var w;
    Var b;
};

LayerVars bind(Tape& tape, const DenseLayer& layer);

Var fc_forward(Tape& tape, Var x, const LayerVars& layer);

/// Eager helpers that run a single op on a throwaway tape.
Tensor fc_forward(const Tensor& x, const DenseLayer& layer);
Tensor relu(const Tensor& x);
Tensor softmax_with_temperature(const Tensor& logits, double temperature);
Tensor concat(const Tensor& a, const Tensor& b);

/// He fan-in initialization: weights ~ N(0, 2 / in_dim), zero biases.
void he_init(DenseLayer& layer, std::mt19937_64& rng);

/// Fresh layers for the given (in, out) shapes, initialized in order from one
/// seeded stream.
std::vector<DenseLayer> init_params(std::span<const std::pair<std::size_t, std::size_t>> shapes,
                                    std::uint64_t seed);

}  // namespace penn
