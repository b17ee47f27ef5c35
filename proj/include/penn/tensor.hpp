#pragma once

#include <array>
#include <concepts>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace penn {

/// Dense row-major array of doubles, rank 1 ([n]) or rank 2 ([rows x cols]).
///
/// A rank-1 tensor of length n behaves as a single row (1 x n) for every
/// row-wise operation, so the same kernels serve single samples and batches.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::size_t n, double fill = 0.0);
    Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);
    /// Lets Tensor(2, 3) mean a 2 x 3 matrix rather than an ambiguous call.
    template <std::integral R, std::integral C>
    Tensor(R rows, C cols) : Tensor(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), 0.0) {}

    static Tensor vector(std::vector<double> values);
    static Tensor vector(std::initializer_list<double> values);
    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rank() const noexcept { return rank_; }
    std::size_t rows() const noexcept { return rank_ == 2 ? dims_[0] : 1; }
    std::size_t cols() const noexcept { return rank_ == 2 ? dims_[1] : dims_[0]; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }
    std::span<const std::size_t> shape() const noexcept { return {dims_.data(), rank_}; }
    bool same_shape(const Tensor& other) const noexcept;
    std::string shape_string() const;

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }
    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols() + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols() + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols(), cols()}; }
    std::span<const double> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols(), cols()};
    }

    /// Same shape, every element zero.
    Tensor zeros_like() const;
    void fill(double value) noexcept;
    bool all_finite() const noexcept;
    double item() const;

    friend bool operator==(const Tensor& a, const Tensor& b) noexcept;

private:
    std::array<std::size_t, 2> dims_{0, 0};
    std::size_t rank_ = 1;
    std::vector<double> data_;
};

}  // namespace penn
