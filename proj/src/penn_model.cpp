#include "penn/penn_model.hpp"

#include <cmath>
#include <numeric>
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

void expect_same_width(const char* what, const Tape& tape, Var a, Var b) {
    const Tensor& ta = tape.value(a);
    const Tensor& tb = tape.value(b);
    if (!ta.same_shape(tb)) {
        throw DimensionError(std::string(what) + ": main input " + ta.shape_string() +
                             " and supplementary input " + tb.shape_string() + " differ");
    }
}

}  // namespace

PennWidths PennWidths::scaled(double m) {
    const PennWidths base;
    return {scaled_width(base.subnet_hidden, m), scaled_width(base.feature, m),
            scaled_width(base.bottleneck, m), scaled_width(base.attention, m),
            scaled_width(base.head_hidden, m)};
}

std::size_t fusion_layer_count(FusionKind kind) {
    switch (kind) {
        case FusionKind::Fcf: return 1;
        case FusionKind::Bnf: return 2;
        case FusionKind::Abf: return 4;
        case FusionKind::Cawf: return 4;
    }
    return 0;
}

std::vector<LayerShape> penn_layer_shapes(FusionKind kind, double width,
                                          const std::array<std::size_t, 4>& group_dims) {
    const PennWidths w = PennWidths::scaled(width);
    std::vector<LayerShape> shapes;
    for (auto d : group_dims) {
        shapes.emplace_back(d, w.subnet_hidden);
        shapes.emplace_back(w.subnet_hidden, w.feature);
    }
    for (int stage = 0; stage < 3; ++stage) {
        switch (kind) {
            case FusionKind::Fcf:
                shapes.emplace_back(2 * w.feature, w.feature);
                break;
            case FusionKind::Bnf:
                shapes.emplace_back(2 * w.feature, w.bottleneck);
                shapes.emplace_back(w.bottleneck, w.feature);
                break;
            case FusionKind::Abf:
                shapes.emplace_back(w.feature, w.attention);  // query
                shapes.emplace_back(w.feature, w.attention);  // key (shared by both inputs)
                shapes.emplace_back(w.feature, w.attention);  // value (shared by both inputs)
                shapes.emplace_back(w.attention, w.feature);  // output lift
                break;
            case FusionKind::Cawf:
                shapes.emplace_back(w.feature, w.bottleneck);  // main importance
                shapes.emplace_back(w.bottleneck, w.feature);
                shapes.emplace_back(w.feature, w.bottleneck);  // supplementary importance
                shapes.emplace_back(w.bottleneck, w.feature);
                break;
        }
    }
    shapes.emplace_back(w.feature, w.head_hidden);
    shapes.emplace_back(w.head_hidden, 1);
    return shapes;
}

PennInputs partition_input(Tape& tape, Var x, const std::array<std::size_t, 4>& group_dims) {
    const std::size_t total = std::accumulate(group_dims.begin(), group_dims.end(), std::size_t{0});
    const Tensor& tx = tape.value(x);
    if (tx.cols() != total) {
        throw SchemaError("partition_input: expected " + std::to_string(total) +
                          " input columns, got " + std::to_string(tx.cols()));
    }
    std::array<Var, 4> parts;
    std::size_t start = 0;
    for (std::size_t g = 0; g < 4; ++g) {
        parts[g] = tape.slice(x, start, group_dims[g]);
        start += group_dims[g];
    }
    return {parts[0], parts[1], parts[2], parts[3]};
}

std::array<Tensor, 4> partition_input(const Tensor& x, const std::array<std::size_t, 4>& group_dims) {
    Tape tape;
    const PennInputs p = partition_input(tape, tape.constant(x), group_dims);
    return {tape.value(p.overall), tape.value(p.intake), tape.value(p.channel),
            tape.value(p.exhaust)};
}

Var subnet_forward(Tape& tape, Var x, std::span<const LayerVars> layers) {
    expect_layers("subnet_forward", layers, 2);
    Var h = tape.relu(fc_forward(tape, x, layers[0]));
    return tape.relu(fc_forward(tape, h, layers[1]));
}

Var fuse_fcf(Tape& tape, Var e_old, Var z, std::span<const LayerVars> layers) {
    expect_layers("fuse_fcf", layers, 1);
    expect_same_width("fuse_fcf", tape, e_old, z);
    return tape.relu(fc_forward(tape, tape.concat(e_old, z), layers[0]));
}

Var fuse_bnf(Tape& tape, Var e_old, Var z, std::span<const LayerVars> layers) {
    expect_layers("fuse_bnf", layers, 2);
    expect_same_width("fuse_bnf", tape, e_old, z);
    Var squeezed = tape.relu(fc_forward(tape, tape.concat(e_old, z), layers[0]));
    return tape.relu(fc_forward(tape, squeezed, layers[1]));
}

AbfTrace fuse_abf_traced(Tape& tape, Var e_old, Var z, std::span<const LayerVars> layers) {
    expect_layers("fuse_abf", layers, 4);
    expect_same_width("fuse_abf", tape, e_old, z);
    AbfTrace t;
    t.query = fc_forward(tape, e_old, layers[0]);
    t.key_main = fc_forward(tape, e_old, layers[1]);
    t.key_supp = fc_forward(tape, z, layers[1]);
    t.value_main = fc_forward(tape, e_old, layers[2]);
    t.value_supp = fc_forward(tape, z, layers[2]);

    const double d = static_cast<double>(tape.value(t.query).cols());
    Var scores = tape.concat(tape.row_dot(t.query, t.key_main), tape.row_dot(t.query, t.key_supp));
    scores = tape.scale(scores, 1.0 / std::sqrt(d));
    t.weights = tape.softmax(scores, kAttentionTemperature);

    Var w_main = tape.slice(t.weights, 0, 1);
    Var w_supp = tape.slice(t.weights, 1, 1);
    t.attended = tape.add(tape.scale_rows(w_main, t.value_main), tape.scale_rows(w_supp, t.value_supp));
    t.out = tape.relu(tape.add(e_old, fc_forward(tape, t.attended, layers[3])));
    return t;
}

Var fuse_abf(Tape& tape, Var e_old, Var z, std::span<const LayerVars> layers) {
    return fuse_abf_traced(tape, e_old, z, layers).out;
}

CawfTrace fuse_cawf_traced(Tape& tape, Var e_old, Var z, std::span<const LayerVars> layers) {
    expect_layers("fuse_cawf", layers, 4);
    expect_same_width("fuse_cawf", tape, e_old, z);
    CawfTrace t;
    t.importance_main =
        fc_forward(tape, tape.relu(fc_forward(tape, e_old, layers[0])), layers[1]);
    t.importance_supp = fc_forward(tape, tape.relu(fc_forward(tape, z, layers[2])), layers[3]);
    t.weight_main = tape.pair_softmax(t.importance_main, t.importance_supp, kChannelTemperature);
    t.weight_supp = tape.pair_softmax(t.importance_supp, t.importance_main, kChannelTemperature);
    t.out = tape.add(tape.mul(t.weight_main, e_old), tape.mul(t.weight_supp, z));
    return t;
}

Var fuse_cawf(Tape& tape, Var e_old, Var z, std::span<const LayerVars> layers) {
    return fuse_cawf_traced(tape, e_old, z, layers).out;
}

Var fuse(Tape& tape, FusionKind kind, Var e_old, Var z, std::span<const LayerVars> layers) {
    switch (kind) {
        case FusionKind::Fcf: return fuse_fcf(tape, e_old, z, layers);
        case FusionKind::Bnf: return fuse_bnf(tape, e_old, z, layers);
        case FusionKind::Abf: return fuse_abf(tape, e_old, z, layers);
        case FusionKind::Cawf: return fuse_cawf(tape, e_old, z, layers);
    }
    throw ContractError("fuse: unknown fusion kind");
}

Var regression_head(Tape& tape, Var e_fusion, std::span<const LayerVars> layers) {
    expect_layers("regression_head", layers, 2);
    Var h = tape.relu(fc_forward(tape, e_fusion, layers[0]));
    return fc_forward(tape, h, layers[1]);
}

PennTrace penn_forward_traced(Tape& tape, FusionKind kind, Var x, std::span<const LayerVars> layers,
                              const std::array<std::size_t, 4>& group_dims) {
    const std::size_t per_fusion = fusion_layer_count(kind);
    expect_layers("penn_forward", layers, 8 + 3 * per_fusion + 2);

    const PennInputs in = partition_input(tape, x, group_dims);
    PennTrace t;
    t.drive = subnet_forward(tape, in.overall, layers.subspan(0, 2));
    t.intake = subnet_forward(tape, in.intake, layers.subspan(2, 2));
    t.channel = subnet_forward(tape, in.channel, layers.subspan(4, 2));
    t.exhaust = subnet_forward(tape, in.exhaust, layers.subspan(6, 2));

    const auto stage = [&](int i) { return layers.subspan(8 + i * per_fusion, per_fusion); };
    t.fused1 = fuse(tape, kind, t.drive, t.intake, stage(0));
    t.fused2 = fuse(tape, kind, t.fused1, t.channel, stage(1));
    t.fused = fuse(tape, kind, t.fused2, t.exhaust, stage(2));
    t.out = regression_head(tape, t.fused, layers.subspan(8 + 3 * per_fusion, 2));
    return t;
}

}  // namespace penn
