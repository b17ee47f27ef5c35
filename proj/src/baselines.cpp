#include "penn/baselines.hpp"

#include <string>

#include "penn/errors.hpp"

namespace penn {

namespace {

void expect_layers(const char* what, std::span<const LayerVars> layers, std::size_t n) {
    if (layers.size() != n) {
        throw ContractError(std::string(what) + ": expected " + std::to_string(n) +
                            " layers, got " + std::to_string(layers.size()));
    }
}

}  // namespace

std::vector<LayerShape> mlp_res_layer_shapes(std::size_t inputs, double width) {
    const MlpResWidths base;
    const std::size_t h = scaled_width(base.trunk, width);
    const std::size_t b = scaled_width(base.bottleneck, width);
    const std::size_t t1 = scaled_width(base.tail1, width);
    const std::size_t t2 = scaled_width(base.tail2, width);
    return {{inputs, h}, {h, b}, {b, h}, {h, b}, {b, h}, {h, t1}, {t1, t2}, {t2, 1}};
}

std::vector<LayerShape> mlp_mul_layer_shapes(std::size_t inputs, double width) {
    const MlpMulWidths base;
    const std::size_t h = scaled_width(base.branch_hidden, width);
    const std::size_t o = scaled_width(base.branch_out, width);
    const std::size_t t = scaled_width(base.trunk, width);
    return {{inputs, h}, {h, o}, {inputs, h}, {h, o}, {2 * o, t}, {t, 1}};
}

Var mlp_res_forward(Tape& tape, Var x, std::span<const LayerVars> layers) {
    expect_layers("mlp_res_forward", layers, 8);
    Var h = tape.relu(fc_forward(tape, x, layers[0]));
    for (std::size_t block = 0; block < 2; ++block) {
        const LayerVars& squeeze = layers[1 + 2 * block];
        const LayerVars& expand = layers[2 + 2 * block];
        Var inner = fc_forward(tape, tape.relu(fc_forward(tape, h, squeeze)), expand);
        h = tape.relu(tape.add(h, inner));
    }
    h = tape.relu(fc_forward(tape, h, layers[5]));
    h = tape.relu(fc_forward(tape, h, layers[6]));
    return fc_forward(tape, h, layers[7]);
}

MlpMulTrace mlp_mul_forward_traced(Tape& tape, Var x, std::span<const LayerVars> layers) {
    expect_layers("mlp_mul_forward", layers, 6);
    MlpMulTrace t;
    t.branch_a = tape.relu(fc_forward(tape, tape.relu(fc_forward(tape, x, layers[0])), layers[1]));
    t.branch_b = tape.relu(fc_forward(tape, tape.relu(fc_forward(tape, x, layers[2])), layers[3]));
    t.merged = tape.concat(t.branch_a, t.branch_b);
    Var h = tape.relu(fc_forward(tape, t.merged, layers[4]));
    t.out = fc_forward(tape, h, layers[5]);
    return t;
}

Var mlp_mul_forward(Tape& tape, Var x, std::span<const LayerVars> layers) {
    return mlp_mul_forward_traced(tape, x, layers).out;
}

}  // namespace penn
