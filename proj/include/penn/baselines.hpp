#pragma once

#include <span>
#include <vector>

#include "penn/layers.hpp"
#include "penn/model_spec.hpp"
#include "penn/tape.hpp"

/// Generalized MLP baselines that see all 18 inputs at once.
namespace penn {

/// MLP-Res: 18 -> 280, two residual blocks 280 -> 64 -> 280 (skip, add, ReLU),
/// then 280 -> 64 -> 64 -> 1. Eight dense layers, 99,897 parameters.
struct MlpResWidths {
    std::size_t trunk = 280;
    std::size_t bottleneck = 64;
    std::size_t tail1 = 64;
    std::size_t tail2 = 64;
};

/// MLP-Mul: two parallel 18 -> 176 -> 160 branches, concatenated, then
/// 320 -> 64 -> 1. Six dense layers, 83,937 parameters.
struct MlpMulWidths {
    std::size_t branch_hidden = 176;
    std::size_t branch_out = 160;
    std::size_t trunk = 64;
};

std::vector<LayerShape> mlp_res_layer_shapes(std::size_t inputs, double width);
std::vector<LayerShape> mlp_mul_layer_shapes(std::size_t inputs, double width);

Var mlp_res_forward(Tape& tape, Var x, std::span<const LayerVars> layers);

struct MlpMulTrace {
    Var branch_a;
    Var branch_b;
    Var merged;
    Var out;
};
MlpMulTrace mlp_mul_forward_traced(Tape& tape, Var x, std::span<const LayerVars> layers);
Var mlp_mul_forward(Tape& tape, Var x, std::span<const LayerVars> layers);

}  // namespace penn
