#include "penn/model_spec.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "penn/baselines.hpp"
#include "penn/errors.hpp"
#include "penn/penn_model.hpp"

namespace penn {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool in_family(double width) {
    return std::any_of(kWidthFamily.begin(), kWidthFamily.end(),
                       [&](double w) { return w == width; });
}

}  // namespace

std::string target_name(Target t) { return t == Target::Thrust ? "thrust" : "impulse"; }

Target parse_target(std::string_view name) {
    const std::string n = lower(name);
    if (n == "thrust") return Target::Thrust;
    if (n == "impulse" || n == "specific_impulse" || n == "isp") return Target::Impulse;
    throw ParameterError("unknown target '" + std::string(name) + "' (expected thrust or impulse)");
}

void ModelSpec::validate() const {
    if (!in_family(width)) {
        throw ParameterError("width multiplier " + std::to_string(width) +
                             " is not one of 0.25, 0.5, 1, 2, 4");
    }
    for (auto d : group_dims) {
        if (d == 0) throw ParameterError("model spec: input group of size 0");
    }
}

bool is_penn(ModelKind kind) noexcept {
    return kind != ModelKind::MlpRes && kind != ModelKind::MlpMul;
}

FusionKind fusion_of(ModelKind kind) {
    switch (kind) {
        case ModelKind::PennFcf: return FusionKind::Fcf;
        case ModelKind::PennBnf: return FusionKind::Bnf;
        case ModelKind::PennAbf: return FusionKind::Abf;
        case ModelKind::PennCawf: return FusionKind::Cawf;
        default: break;
    }
    throw ContractError("fusion_of: " + model_name(kind) + " has no fusion modules");
}

std::string model_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::PennFcf: return "penn-fcf";
        case ModelKind::PennBnf: return "penn-bnf";
        case ModelKind::PennAbf: return "penn-abf";
        case ModelKind::PennCawf: return "penn-cawf";
        case ModelKind::MlpRes: return "mlp-res";
        case ModelKind::MlpMul: return "mlp-mul";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view name) {
    const std::string n = lower(name);
    for (auto kind : kAllModelKinds) {
        if (model_name(kind) == n) return kind;
    }
    throw ParameterError("unknown model '" + std::string(name) +
                         "' (expected penn-fcf, penn-bnf, penn-abf, penn-cawf, mlp-res, mlp-mul)");
}

std::string fusion_name(FusionKind kind) {
    switch (kind) {
        case FusionKind::Fcf: return "FCF";
        case FusionKind::Bnf: return "BNF";
        case FusionKind::Abf: return "ABF";
        case FusionKind::Cawf: return "CAWF";
    }
    return "?";
}

std::string display_name(const ModelSpec& spec) {
    std::string name;
    switch (spec.kind) {
        case ModelKind::MlpRes: name = "MLP-Res"; break;
        case ModelKind::MlpMul: name = "MLP-Mul"; break;
        default: name = "PENN-" + fusion_name(fusion_of(spec.kind)); break;
    }
    if (spec.width == 0.25) name += "-Down4";
    else if (spec.width == 0.5) name += "-Down2";
    else if (spec.width == 2.0) name += "-Up2";
    else if (spec.width == 4.0) name += "-Up4";
    else if (spec.width != 1.0) name += "-x" + std::to_string(spec.width);
    return name;
}

std::size_t scaled_width(std::size_t base, double multiplier) {
    const auto w = std::llround(static_cast<double>(base) * multiplier);
    return static_cast<std::size_t>(std::max<long long>(1, w));
}

ModelSpec scale_model(const ModelSpec& spec, double factor) {
    if (!(factor > 0.0)) throw ParameterError("scale_model: factor must be positive");
    ModelSpec out = spec;
    out.width = spec.width * factor;
    out.validate();
    return out;
}

std::vector<LayerShape> layer_shapes(const ModelSpec& spec) {
    spec.validate();
    const std::size_t inputs =
        std::accumulate(spec.group_dims.begin(), spec.group_dims.end(), std::size_t{0});
    switch (spec.kind) {
        case ModelKind::MlpRes: return mlp_res_layer_shapes(inputs, spec.width);
        case ModelKind::MlpMul: return mlp_mul_layer_shapes(inputs, spec.width);
        default: return penn_layer_shapes(fusion_of(spec.kind), spec.width, spec.group_dims);
    }
}

std::size_t count_params(const std::vector<LayerShape>& shapes) {
    std::size_t total = 0;
    for (auto [in, out] : shapes) total += (in + 1) * out;
    return total;
}

std::size_t count_params(const ModelSpec& spec) { return count_params(layer_shapes(spec)); }

}  // namespace penn
