#include "penn/model.hpp"

#include <string>

#include "penn/baselines.hpp"
#include "penn/errors.hpp"
#include "penn/penn_model.hpp"

namespace penn {

Model::Model(ModelSpec spec, std::vector<DenseLayer> layers)
    : spec_(spec), layers_(std::move(layers)) {
    const auto shapes = layer_shapes(spec_);
    if (shapes.size() != layers_.size()) {
        throw ContractError(display_name(spec_) + " expects " + std::to_string(shapes.size()) +
                            " layers, got " + std::to_string(layers_.size()));
    }
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        const auto& l = layers_[i];
        if (l.weights.rank() != 2 || l.bias.rank() != 1 || l.bias.size() != l.out_dim() ||
            l.in_dim() != shapes[i].first || l.out_dim() != shapes[i].second) {
            throw ContractError(display_name(spec_) + " layer " + std::to_string(i) + " has weights " +
                                l.weights.shape_string() + ", expected [" +
                                std::to_string(shapes[i].second) + "x" +
                                std::to_string(shapes[i].first) + "]");
        }
    }
}

Model Model::create(const ModelSpec& spec, std::uint64_t seed) {
    const auto shapes = layer_shapes(spec);
    return Model(spec, init_params(shapes, seed));
}

std::size_t Model::param_count() const noexcept {
    std::size_t total = 0;
    for (const auto& l : layers_) total += l.param_count();
    return total;
}

std::vector<Tensor*> Model::parameter_tensors() {
    std::vector<Tensor*> out;
    out.reserve(2 * layers_.size());
    for (auto& l : layers_) {
        out.push_back(&l.weights);
        out.push_back(&l.bias);
    }
    return out;
}

std::vector<const Tensor*> Model::parameter_tensors() const {
    std::vector<const Tensor*> out;
    out.reserve(2 * layers_.size());
    for (const auto& l : layers_) {
        out.push_back(&l.weights);
        out.push_back(&l.bias);
    }
    return out;
}

std::vector<LayerVars> Model::bind(Tape& tape) const {
    std::vector<LayerVars> bound;
    bound.reserve(layers_.size());
    for (const auto& l : layers_) bound.push_back(penn::bind(tape, l));
    return bound;
}

Var Model::forward(Tape& tape, std::span<const LayerVars> bound, Var x) const {
    switch (spec_.kind) {
        case ModelKind::MlpRes: return mlp_res_forward(tape, x, bound);
        case ModelKind::MlpMul: return mlp_mul_forward(tape, x, bound);
        default:
            return penn_forward_traced(tape, fusion_of(spec_.kind), x, bound, spec_.group_dims).out;
    }
}

Var Model::forward(Tape& tape, Var x) const {
    const auto bound = bind(tape);
    return forward(tape, bound, x);
}

std::size_t count_params(const Model& model) { return model.param_count(); }

}  // namespace penn
