#include "penn/kernels.hpp"

namespace penn::kernels::serial {

void linear_forward(std::span<const double> x, std::size_t batch, std::size_t in,
                    std::span<const double> w, std::span<const double> b, std::size_t out,
                    std::span<double> y) {
    for (std::size_t i = 0; i < batch; ++i) {
        for (std::size_t o = 0; o < out; ++o) {
            double acc = 0.0;
            for (std::size_t k = 0; k < in; ++k) acc += x[i * in + k] * w[o * in + k];
            y[i * out + o] = acc + b[o];
        }
    }
}

void linear_backward_input(std::span<const double> dy, std::size_t batch, std::size_t out,
                           std::span<const double> w, std::size_t in, std::span<double> dx) {
    for (std::size_t i = 0; i < batch; ++i) {
        for (std::size_t k = 0; k < in; ++k) {
            double acc = dx[i * in + k];
            for (std::size_t o = 0; o < out; ++o) acc += dy[i * out + o] * w[o * in + k];
            dx[i * in + k] = acc;
        }
    }
}

void linear_backward_params(std::span<const double> dy, std::span<const double> x,
                            std::size_t batch, std::size_t in, std::size_t out,
                            std::span<double> dw, std::span<double> db) {
    for (std::size_t o = 0; o < out; ++o) {
        double bias_acc = db[o];
        for (std::size_t i = 0; i < batch; ++i) bias_acc += dy[i * out + o];
        db[o] = bias_acc;
        for (std::size_t k = 0; k < in; ++k) {
            double acc = dw[o * in + k];
            for (std::size_t i = 0; i < batch; ++i) acc += dy[i * out + o] * x[i * in + k];
            dw[o * in + k] = acc;
        }
    }
}

}  // namespace penn::kernels::serial
