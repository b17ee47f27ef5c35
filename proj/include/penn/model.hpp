#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "penn/layers.hpp"
#include "penn/model_spec.hpp"
#include "penn/tape.hpp"

namespace penn {

/// An instantiated architecture: a ModelSpec plus its dense layers in
/// declaration order. Copying a Model deep-copies every parameter.
///
/// forward() only reads the layers, so one Model can serve concurrent
/// inference on separate tapes; training mutates it from a single writer.
class Model {
public:
    /// Throws ContractError if `layers` do not have the shapes the ModelSpec implies.
    Model(ModelSpec spec, std::vector<DenseLayer> layers);

    /// He-initialized parameters, fully determined by `seed`.
    static Model create(const ModelSpec& spec, std::uint64_t seed);

    const ModelSpec& spec() const noexcept { return spec_; }
    std::span<const DenseLayer> layers() const noexcept { return layers_; }
    std::span<DenseLayer> layers() noexcept { return layers_; }
    std::size_t param_count() const noexcept;

    /// Weights then bias of each layer, in declaration order.
    std::vector<Tensor*> parameter_tensors();
    std::vector<const Tensor*> parameter_tensors() const;

    std::vector<LayerVars> bind(Tape& tape) const;

    /// Raw scalar output per row: [18] -> [1], [B x 18] -> [B x 1].
    Var forward(Tape& tape, std::span<const LayerVars> bound, Var x) const;
    /// Convenience: bind and forward on the given tape.
    Var forward(Tape& tape, Var x) const;

    friend bool operator==(const Model&, const Model&) = default;

private:
    ModelSpec spec_;
    std::vector<DenseLayer> layers_;
};

std::size_t count_params(const Model& model);

}  // namespace penn
