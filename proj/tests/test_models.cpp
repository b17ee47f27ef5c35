#include <gtest/gtest.h>

#include <random>

#include "penn/baselines.hpp"
#include "penn/errors.hpp"
#include "penn/model.hpp"
#include "penn/penn_model.hpp"

using namespace penn;

namespace {

Tensor random_inputs(std::size_t rows, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, 1.0);
    Tensor x(rows, kInputCount);
    for (auto& v : x.data()) v = d(rng);
    return x;
}

ModelSpec spec_of(ModelKind kind, double width = 1.0) {
    ModelSpec s;
    s.kind = kind;
    s.width = width;
    return s;
}

}  // namespace

TEST(Models, ParameterCounts) {
    EXPECT_EQ(count_params(spec_of(ModelKind::PennFcf)), 120449u);
    EXPECT_EQ(count_params(spec_of(ModelKind::PennBnf)), 59105u);
    EXPECT_EQ(count_params(spec_of(ModelKind::PennAbf)), 46865u);
    EXPECT_EQ(count_params(spec_of(ModelKind::PennCawf)), 71873u);
    EXPECT_EQ(count_params(spec_of(ModelKind::MlpRes)), 99897u);
    EXPECT_EQ(count_params(spec_of(ModelKind::MlpMul)), 83937u);
}

TEST(Models, ScalingFamilyCounts) {
    EXPECT_EQ(count_params(spec_of(ModelKind::PennBnf, 0.25)), 4025u);
    EXPECT_EQ(count_params(spec_of(ModelKind::PennBnf, 0.5)), 15217u);
    EXPECT_EQ(count_params(spec_of(ModelKind::PennBnf, 2.0)), 232897u);
    EXPECT_EQ(count_params(spec_of(ModelKind::PennBnf, 4.0)), 924545u);
    EXPECT_EQ(scale_model(spec_of(ModelKind::PennBnf), 4.0).width, 4.0);
    EXPECT_THROW(spec_of(ModelKind::PennBnf, 3.0).validate(), ParameterError);
}

TEST(Models, CountMatchesLayerFormula) {
    for (ModelKind kind : kAllModelKinds) {
        std::size_t manual = 0;
        for (auto [in, out] : layer_shapes(spec_of(kind))) manual += (in + 1) * out;
        EXPECT_EQ(manual, count_params(spec_of(kind))) << model_name(kind);
        EXPECT_EQ(Model::create(spec_of(kind), 0).param_count(), manual);
    }
}

TEST(Models, FusionLayerCounts) {
    EXPECT_EQ(fusion_layer_count(FusionKind::Fcf), 1u);
    EXPECT_EQ(fusion_layer_count(FusionKind::Bnf), 2u);
    EXPECT_EQ(fusion_layer_count(FusionKind::Abf), 4u);
    EXPECT_EQ(fusion_layer_count(FusionKind::Cawf), 4u);
}

TEST(Models, Names) {
    for (ModelKind kind : kAllModelKinds) EXPECT_EQ(parse_model_kind(model_name(kind)), kind);
    EXPECT_EQ(parse_model_kind("PENN-BNF"), ModelKind::PennBnf);
    EXPECT_THROW(parse_model_kind("penn-xyz"), ParameterError);
    EXPECT_EQ(display_name(spec_of(ModelKind::PennBnf, 0.25)), "PENN-BNF-Down4");
    EXPECT_EQ(display_name(spec_of(ModelKind::MlpRes)), "MLP-Res");
}

TEST(Models, OutputShapes) {
    const Tensor batch = random_inputs(5, 1);
    for (ModelKind kind : kAllModelKinds) {
        const Model m = Model::create(spec_of(kind), 3);
        Tape tape;
        const Tensor& y = tape.value(m.forward(tape, tape.constant(batch)));
        EXPECT_EQ(y.rows(), 5u) << model_name(kind);
        EXPECT_EQ(y.cols(), 1u) << model_name(kind);
        EXPECT_TRUE(y.all_finite());

        // A single sample gives the same number as its row in a batch.
        Tape single;
        Tensor row = Tensor::vector(std::vector<double>(batch.row(2).begin(), batch.row(2).end()));
        const Tensor& y1 = single.value(m.forward(single, single.constant(row)));
        EXPECT_EQ(y1.size(), 1u);
        EXPECT_NEAR(y1[0], y(2, 0), 1e-12) << model_name(kind);
    }
}

TEST(Models, WrongInputWidthIsSchemaError) {
    const Model m = Model::create(spec_of(ModelKind::PennBnf), 0);
    Tape tape;
    EXPECT_THROW(m.forward(tape, tape.constant(Tensor(2, 17))), SchemaError);
    EXPECT_THROW(partition_input(Tensor(1, 19)), SchemaError);
    const auto parts = partition_input(random_inputs(2, 4));
    EXPECT_EQ(parts[0].cols(), 3u);
    EXPECT_EQ(parts[1].cols(), 2u);
    EXPECT_EQ(parts[2].cols(), 11u);
    EXPECT_EQ(parts[3].cols(), 2u);
}

TEST(Models, CreationIsDeterministic) {
    for (ModelKind kind : kAllModelKinds) {
        EXPECT_EQ(Model::create(spec_of(kind), 5), Model::create(spec_of(kind), 5));
        EXPECT_NE(Model::create(spec_of(kind), 5), Model::create(spec_of(kind), 6));
    }
}

TEST(Models, LayerShapeMismatchRejected) {
    const ModelSpec s = spec_of(ModelKind::PennFcf);
    const Model model = Model::create(s, 0);
    const auto layers = model.layers();
    std::vector<DenseLayer> copy(layers.begin(), layers.end());
    copy.pop_back();
    EXPECT_THROW(Model(s, copy), ContractError);
    copy = std::vector<DenseLayer>(layers.begin(), layers.end());
    copy[0] = DenseLayer(4, 32);
    EXPECT_THROW(Model(s, copy), ContractError);
}

TEST(Models, MlpMulBranchesConcatenate) {
    const Model m = Model::create(spec_of(ModelKind::MlpMul), 2);
    Tape tape;
    const auto bound = m.bind(tape);
    const auto tr = mlp_mul_forward_traced(tape, tape.constant(random_inputs(3, 9)), bound);
    EXPECT_EQ(tape.value(tr.merged).cols(), 320u);
    EXPECT_EQ(tape.value(tr.branch_a).cols(), 160u);
}

TEST(Models, PennTraceWidths) {
    for (FusionKind fk : {FusionKind::Fcf, FusionKind::Bnf, FusionKind::Abf, FusionKind::Cawf}) {
        const ModelKind kind = fk == FusionKind::Fcf   ? ModelKind::PennFcf
                               : fk == FusionKind::Bnf ? ModelKind::PennBnf
                               : fk == FusionKind::Abf ? ModelKind::PennAbf
                                                       : ModelKind::PennCawf;
        const Model m = Model::create(spec_of(kind), 1);
        Tape tape;
        const auto bound = m.bind(tape);
        const auto tr = penn_forward_traced(tape, fk, tape.constant(random_inputs(2, 3)), bound);
        EXPECT_EQ(tape.value(tr.drive).cols(), 128u);
        EXPECT_EQ(tape.value(tr.fused).cols(), 128u);
        EXPECT_EQ(tape.value(tr.out).cols(), 1u);
    }
}
