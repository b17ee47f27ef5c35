#pragma once

#include <span>
#include <string>
#include <string_view>

#include "penn/schema.hpp"
#include "penn/tape.hpp"

namespace penn {

enum class LossKind { Mse, Mae, Mare };

std::string loss_name(LossKind kind);
LossKind parse_loss(std::string_view name);

/// Post-processing and admissibility rules for predictions and targets.
struct PredictionPolicy {
    bool clamp_negative_thrust = true;
    bool drop_zero_impulse = true;
    /// Targets with |y| <= mare_epsilon are inadmissible under MARE.
    double mare_epsilon = 1e-9;
};

/// Differentiable training loss over a batch of predictions:
///   MSE  = mean((y - yhat)^2)
///   MAE  = mean(|y - yhat|)
///   MARE = mean(|(y - yhat) / y|)
/// `target` must hold one value per prediction. MARE throws PolicyError
/// naming the first target with |y| <= mare_epsilon.
Var loss(Tape& tape, LossKind kind, Var prediction, const Tensor& target, double mare_epsilon = 1e-9);

/// Same quantities, evaluated directly.
double loss_value(LossKind kind, std::span<const double> y, std::span<const double> y_hat,
                  double mare_epsilon = 1e-9);

/// 100 * MARE; evaluation only. PolicyError on a zero target.
double mape(std::span<const double> y, std::span<const double> y_hat);

/// Thrust predictions below zero become zero when clamping is enabled; impulse
/// predictions pass through.
double apply_policy(Target target, double prediction, const PredictionPolicy& policy);

}  // namespace penn
