#pragma once

#include <cstddef>
#include <span>

/// Dense-layer kernels. Every layer in every model funnels through these three
/// routines, so they carry essentially all of the floating-point work.
///
/// Layout: x is [batch x in], w is [out x in], b is [out], y is [batch x out],
/// all row-major. Backward routines accumulate (+=) into their outputs.
///
/// `serial` is the straightforward reference; `omp` is the tuned version used
/// by the tape. Both sum every output element over the same index order, and
/// `omp` only splits work across independent output elements, so results do not
/// depend on the thread count.
namespace penn::kernels {

namespace serial {
void linear_forward(std::span<const double> x, std::size_t batch, std::size_t in,
                    std::span<const double> w, std::span<const double> b, std::size_t out,
                    std::span<double> y);
void linear_backward_input(std::span<const double> dy, std::size_t batch, std::size_t out,
                           std::span<const double> w, std::size_t in, std::span<double> dx);
void linear_backward_params(std::span<const double> dy, std::span<const double> x,
                            std::size_t batch, std::size_t in, std::size_t out,
                            std::span<double> dw, std::span<double> db);
}  // namespace serial

namespace omp {
void linear_forward(std::span<const double> x, std::size_t batch, std::size_t in,
                    std::span<const double> w, std::span<const double> b, std::size_t out,
                    std::span<double> y);
void linear_backward_input(std::span<const double> dy, std::size_t batch, std::size_t out,
                           std::span<const double> w, std::size_t in, std::span<double> dx);
void linear_backward_params(std::span<const double> dy, std::span<const double> x,
                            std::size_t batch, std::size_t in, std::size_t out,
                            std::span<double> dw, std::span<double> db);
}  // namespace omp

/// Multiply-adds below which the omp kernels stay on the calling thread.
inline constexpr std::size_t kParallelThreshold = 1u << 16;

}  // namespace penn::kernels
