#include "penn/objectives.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "penn/errors.hpp"

namespace penn {

namespace {

void check_pair(const char* what, std::size_t ny, std::size_t nyh) {
    if (ny != nyh) {
        throw DimensionError(std::string(what) + ": " + std::to_string(ny) + " targets vs " +
                             std::to_string(nyh) + " predictions");
    }
    if (ny == 0) throw DimensionError(std::string(what) + ": empty batch");
}

void check_admissible(std::span<const double> y, double eps) {
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(std::fabs(y[i]) > eps)) {
            throw PolicyError("MARE: target at sample " + std::to_string(i) + " is " +
                              std::to_string(y[i]) + " (|y| must exceed " + std::to_string(eps) + ")");
        }
    }
}

}  // namespace

std::string loss_name(LossKind kind) {
    switch (kind) {
        case LossKind::Mse: return "mse";
        case LossKind::Mae: return "mae";
        case LossKind::Mare: return "mare";
    }
    return "?";
}

LossKind parse_loss(std::string_view name) {
    std::string n(name);
    std::transform(n.begin(), n.end(), n.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (n == "mse") return LossKind::Mse;
    if (n == "mae") return LossKind::Mae;
    if (n == "mare") return LossKind::Mare;
    throw ParameterError("unknown loss '" + std::string(name) + "' (expected mse, mae or mare)");
}

Var loss(Tape& tape, LossKind kind, Var prediction, const Tensor& target, double mare_epsilon) {
    const Tensor& pred = tape.value(prediction);
    check_pair("loss", target.size(), pred.size());

    Tensor y = pred.zeros_like();
    std::copy(target.data().begin(), target.data().end(), y.data().begin());
    Var residual = tape.sub(prediction, tape.constant(y));
    switch (kind) {
        case LossKind::Mse: return tape.mean(tape.square(residual));
        case LossKind::Mae: return tape.mean(tape.abs(residual));
        case LossKind::Mare: {
            check_admissible(y.data(), mare_epsilon);
            Tensor inv = y;
            for (auto& v : inv.data()) v = 1.0 / v;
            return tape.mean(tape.abs(tape.mul(residual, tape.constant(std::move(inv)))));
        }
    }
    throw ContractError("loss: unknown kind");
}

double loss_value(LossKind kind, std::span<const double> y, std::span<const double> y_hat,
                  double mare_epsilon) {
    check_pair("loss_value", y.size(), y_hat.size());
    if (kind == LossKind::Mare) check_admissible(y, mare_epsilon);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - y_hat[i];
        switch (kind) {
            case LossKind::Mse: acc += r * r; break;
            case LossKind::Mae: acc += std::fabs(r); break;
            case LossKind::Mare: acc += std::fabs(r / y[i]); break;
        }
    }
    return acc / static_cast<double>(y.size());
}

double mape(std::span<const double> y, std::span<const double> y_hat) {
    check_pair("mape", y.size(), y_hat.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] == 0.0) {
            throw PolicyError("MAPE: zero target at sample " + std::to_string(i));
        }
    }
    return 100.0 * loss_value(LossKind::Mare, y, y_hat, 0.0);
}

double apply_policy(Target target, double prediction, const PredictionPolicy& policy) {
    if (target == Target::Thrust && policy.clamp_negative_thrust && prediction < 0.0) return 0.0;
    return prediction;
}

}  // namespace penn
