#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "penn/adam.hpp"
#include "penn/errors.hpp"
#include "penn/layers.hpp"
#include "penn/schedule.hpp"

using namespace penn;

TEST(Layers, HeInitStatistics) {
    DenseLayer layer(200, 300);
    std::mt19937_64 rng(7);
    he_init(layer, rng);
    double sum = 0, sq = 0;
    for (double w : layer.weights.data()) {
        sum += w;
        sq += w * w;
    }
    const double n = static_cast<double>(layer.weights.size());
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    EXPECT_NEAR(mean, 0.0, 4.0 * std::sqrt(2.0 / 200.0 / n));
    EXPECT_NEAR(var, 2.0 / 200.0, 0.02 * 2.0 / 200.0 * 3);
    for (double b : layer.bias.data()) EXPECT_EQ(b, 0.0);
    EXPECT_EQ(layer.param_count(), 201u * 300u);
}

TEST(Layers, InitParamsDeterministic) {
    const std::vector<std::pair<std::size_t, std::size_t>> shapes{{3, 4}, {4, 2}};
    const auto a = init_params(shapes, 11);
    const auto b = init_params(shapes, 11);
    const auto c = init_params(shapes, 12);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    ASSERT_EQ(a.size(), 2u);
    EXPECT_EQ(a[1].in_dim(), 4u);
    EXPECT_EQ(a[1].out_dim(), 2u);
}

TEST(Layers, EagerHelpers) {
    DenseLayer layer(2, 1);
    layer.weights = Tensor::matrix(1, 2, {2.0, -1.0});
    layer.bias = Tensor::vector({0.5});
    EXPECT_EQ(fc_forward(Tensor::vector({1.0, 3.0}), layer).item(), -0.5);
    const Tensor r = relu(Tensor::vector({-1.0, 0.0, 2.0}));
    EXPECT_EQ(r, Tensor::vector({0.0, 0.0, 2.0}));
    const Tensor s = softmax_with_temperature(Tensor::vector({0.0, std::log(3.0)}), 1.0);
    EXPECT_NEAR(s[0], 0.25, 1e-15);
    EXPECT_NEAR(s[1], 0.75, 1e-15);
    EXPECT_EQ(concat(Tensor::vector({1.0}), Tensor::vector({2.0, 3.0})), Tensor::vector({1.0, 2.0, 3.0}));
}

TEST(Adam, MatchesHandComputedSteps) {
    Tensor p = Tensor::vector({1.0, -2.0});
    Tensor g(2);
    std::vector<Tensor*> params{&p};
    std::vector<const Tensor*> grads{&g};
    std::vector<const Tensor*> cparams{&p};
    AdamState state = AdamState::for_params(cparams);

    double m[2] = {0, 0}, v[2] = {0, 0}, ref[2] = {1.0, -2.0};
    const double lr = 0.01;
    const double gseq[3][2] = {{0.5, -1.0}, {0.1, 2.0}, {-0.3, 0.0}};
    for (int step = 1; step <= 3; ++step) {
        g[0] = gseq[step - 1][0];
        g[1] = gseq[step - 1][1];
        adam_step(params, grads, state, lr);
        for (int j = 0; j < 2; ++j) {
            m[j] = 0.9 * m[j] + 0.1 * g[j];
            v[j] = 0.999 * v[j] + 0.001 * g[j] * g[j];
            const double mh = m[j] / (1 - std::pow(0.9, step));
            const double vh = v[j] / (1 - std::pow(0.999, step));
            ref[j] -= lr * mh / (std::sqrt(vh) + 1e-8);
            EXPECT_NEAR(p[j], ref[j], 1e-15) << "step " << step;
        }
    }
    EXPECT_EQ(state.t, 3);
}

TEST(Adam, FirstStepMovesByLearningRate) {
    Tensor p = Tensor::vector({0.0, 0.0});
    Tensor g = Tensor::vector({3.0, -1e-3});
    std::vector<Tensor*> params{&p};
    std::vector<const Tensor*> grads{&g};
    std::vector<const Tensor*> cparams{&p};
    AdamState state = AdamState::for_params(cparams);
    adam_step(params, grads, state, 0.1);
    EXPECT_NEAR(p[0], -0.1, 1e-9);
    EXPECT_NEAR(p[1], 0.1, 1e-5);
}

TEST(Adam, RejectsBadInputs) {
    Tensor p(2), g(3);
    std::vector<Tensor*> params{&p};
    std::vector<const Tensor*> grads{&g};
    std::vector<const Tensor*> cparams{&p};
    AdamState state = AdamState::for_params(cparams);
    EXPECT_THROW(adam_step(params, grads, state, 0.1), DimensionError);
    Tensor g2(2);
    grads[0] = &g2;
    EXPECT_THROW(adam_step(params, grads, state, 0.0), ParameterError);
}

TEST(Schedule, PennDefault) {
    const auto s = LrSchedule::penn_default();
    EXPECT_EQ(lr_at_epoch(s, 0), 0.002);
    EXPECT_EQ(lr_at_epoch(s, 59), 0.002);
    EXPECT_EQ(lr_at_epoch(s, 60), 0.001);
    EXPECT_EQ(lr_at_epoch(s, 80), 0.0005);
    EXPECT_EQ(lr_at_epoch(s, 99), 0.0005);
    EXPECT_EQ(lr_at_epoch(s, 100), 0.00025);
    EXPECT_EQ(lr_at_epoch(s, 149), 0.00025);
}

TEST(Schedule, MlpDefault) {
    const auto s = LrSchedule::mlp_default();
    EXPECT_EQ(lr_at_epoch(s, 79), 0.01);
    EXPECT_NEAR(lr_at_epoch(s, 80), 0.001, 1e-18);
    EXPECT_NEAR(lr_at_epoch(s, 149), 0.0001, 1e-18);
}

TEST(Schedule, Validation) {
    EXPECT_NO_THROW(LrSchedule::penn_default().validate());
    EXPECT_THROW((LrSchedule{0.01, {10}, 1.5}).validate(), ParameterError);
    EXPECT_THROW((LrSchedule{0.01, {10}, 0.0}).validate(), ParameterError);
    EXPECT_THROW((LrSchedule{-0.01, {10}, 0.5}).validate(), ParameterError);
    EXPECT_THROW((LrSchedule{0.01, {20, 10}, 0.5}).validate(), ParameterError);
    EXPECT_THROW(lr_at_epoch(LrSchedule::penn_default(), -1), ParameterError);
}
