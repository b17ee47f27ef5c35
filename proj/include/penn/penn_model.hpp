#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "penn/layers.hpp"
#include "penn/model_spec.hpp"
#include "penn/tape.hpp"

/// Physical-embedded network: four component sub-networks whose features are
/// merged along the engine flow path (overall condition -> intake -> channels
/// -> exhaust) by three fusion modules, then regressed to one target.
namespace penn {

/// Base layer widths at multiplier 1.
struct PennWidths {
    std::size_t subnet_hidden = 32;
    std::size_t feature = 128;
    std::size_t bottleneck = 32;  ///< BNF and CAWF hidden layer
    std::size_t attention = 16;   ///< ABF query/key/value size
    std::size_t head_hidden = 32;

    static PennWidths scaled(double multiplier);
};

inline constexpr double kAttentionTemperature = 10.0;
inline constexpr double kChannelTemperature = 1.0;

/// Dense layers per fusion module: FCF 1, BNF 2, ABF 4 (query, key, value,
/// output), CAWF 4 (main importance pair, supplementary importance pair).
std::size_t fusion_layer_count(FusionKind kind);

std::vector<LayerShape> penn_layer_shapes(FusionKind kind, double width,
                                          const std::array<std::size_t, 4>& group_dims);

/// Column slices of the 18-wide input, one per sub-network.
struct PennInputs {
    Var overall;
    Var intake;
    Var channel;
    Var exhaust;
};

/// SchemaError unless x has exactly sum(group_dims) columns.
PennInputs partition_input(Tape& tape, Var x, const std::array<std::size_t, 4>& group_dims);
std::array<Tensor, 4> partition_input(const Tensor& x,
                                      const std::array<std::size_t, 4>& group_dims = kGroupDims);

/// ReLU(FC_feature(ReLU(FC_hidden(x)))).
Var subnet_forward(Tape& tape, Var x, std::span<const LayerVars> layers);

/// ReLU(FC(e_old ++ z)).
Var fuse_fcf(Tape& tape, Var e_old, Var z, std::span<const LayerVars> layers);
/// ReLU(FC(ReLU(FC_bottleneck(e_old ++ z)))).
Var fuse_bnf(Tape& tape, Var e_old, Var z, std::span<const LayerVars> layers);

struct AbfTrace {
    Var query;
    Var key_main, key_supp;
    Var value_main, value_supp;
    Var weights;  ///< [B x 2] attention weights over (main, supplementary)
    Var attended;
    Var out;
};
/// Query from the main input only; one shared key and one shared value
/// projection applied to both inputs; scores scaled by 1/sqrt(d), d the query
/// size, then a temperature-10 softmax; output ReLU(e_old + FC(attended)).
AbfTrace fuse_abf_traced(Tape& tape, Var e_old, Var z, std::span<const LayerVars> layers);
Var fuse_abf(Tape& tape, Var e_old, Var z, std::span<const LayerVars> layers);

struct CawfTrace {
    Var importance_main;
    Var importance_supp;
    Var weight_main;
    Var weight_supp;
    Var out;
};
/// Separate bottleneck importance networks per input; per-channel softmax over
/// the pair (temperature 1); output w1 * e_old + w2 * z.
CawfTrace fuse_cawf_traced(Tape& tape, Var e_old, Var z, std::span<const LayerVars> layers);
Var fuse_cawf(Tape& tape, Var e_old, Var z, std::span<const LayerVars> layers);

Var fuse(Tape& tape, FusionKind kind, Var e_old, Var z, std::span<const LayerVars> layers);

/// FC_1(ReLU(FC_hidden(e))).
Var regression_head(Tape& tape, Var e_fusion, std::span<const LayerVars> layers);

struct PennTrace {
    Var drive, intake, channel, exhaust;  ///< sub-network features
    Var fused1, fused2, fused;             ///< running feature after each fusion
    Var out;
};

/// Full PENN forward over an input of [18] or [B x 18]; `layers` in
/// penn_layer_shapes order.
PennTrace penn_forward_traced(Tape& tape, FusionKind kind, Var x, std::span<const LayerVars> layers,
                              const std::array<std::size_t, 4>& group_dims = kGroupDims);

}  // namespace penn
