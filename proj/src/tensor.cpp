#include "penn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "penn/errors.hpp"

namespace penn {

Tensor::Tensor(std::size_t n, double fill) : dims_{n, 0}, rank_(1), data_(n, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : dims_{rows, cols}, rank_(2), data_(rows * cols, fill) {}

Tensor Tensor::vector(std::vector<double> values) {
    Tensor t;
    t.dims_ = {values.size(), 0};
    t.rank_ = 1;
    t.data_ = std::move(values);
    return t;
}

Tensor Tensor::vector(std::initializer_list<double> values) {
    return vector(std::vector<double>(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
    if (values.size() != rows * cols) {
        throw DimensionError("Tensor::matrix: " + std::to_string(values.size()) +
                             " values cannot fill [" + std::to_string(rows) + "x" +
                             std::to_string(cols) + "]");
    }
    Tensor t;
    t.dims_ = {rows, cols};
    t.rank_ = 2;
    t.data_ = std::move(values);
    return t;
}

bool Tensor::same_shape(const Tensor& other) const noexcept {
    return rank_ == other.rank_ && dims_[0] == other.dims_[0] &&
           (rank_ == 1 || dims_[1] == other.dims_[1]);
}

std::string Tensor::shape_string() const {
    if (rank_ == 1) return "[" + std::to_string(dims_[0]) + "]";
    return "[" + std::to_string(dims_[0]) + "x" + std::to_string(dims_[1]) + "]";
}

Tensor Tensor::zeros_like() const {
    Tensor t = *this;
    t.fill(0.0);
    return t;
}

void Tensor::fill(double value) noexcept { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double Tensor::item() const {
    if (data_.size() != 1) {
        throw ContractError("Tensor::item on non-scalar tensor " + shape_string());
    }
    return data_[0];
}

bool operator==(const Tensor& a, const Tensor& b) noexcept {
    return a.same_shape(b) && a.data_ == b.data_;
}

}  // namespace penn
