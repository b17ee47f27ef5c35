#include "penn/layers.hpp"

#include <cmath>

namespace penn {

LayerVars bind(Tape& tape, const DenseLayer& layer) {
    return {tape.parameter(layer.weights), tape.parameter(layer.bias)};
}

Var fc_forward(Tape& tape, Var x, const LayerVars& layer) { return tape.linear(x, layer.w, layer.b); }

Tensor fc_forward(const Tensor& x, const DenseLayer& layer) {
    Tape tape;
    Var y = fc_forward(tape, tape.constant(x), bind(tape, layer));
    return tape.value(y);
}

Tensor relu(const Tensor& x) {
    Tape tape;
    return tape.value(tape.relu(tape.constant(x)));
}

Tensor softmax_with_temperature(const Tensor& logits, double temperature) {
    Tape tape;
    return tape.value(tape.softmax(tape.constant(logits), temperature));
}

Tensor concat(const Tensor& a, const Tensor& b) {
    Tape tape;
    return tape.value(tape.concat(tape.constant(a), tape.constant(b)));
}

void he_init(DenseLayer& layer, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(layer.in_dim())));
    for (auto& w : layer.weights.data()) w = dist(rng);
    layer.bias.fill(0.0);
}

std::vector<DenseLayer> init_params(std::span<const std::pair<std::size_t, std::size_t>> shapes,
                                    std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<DenseLayer> layers;
    layers.reserve(shapes.size());
    for (auto [in, out] : shapes) {
        layers.emplace_back(in, out);
        he_init(layers.back(), rng);
    }
    return layers;
}

}  // namespace penn
