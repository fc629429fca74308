#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dlab::ad {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

/// Dense row-major tensor of doubles. A scalar is the shape {1}.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape);
    Tensor(Shape shape, std::vector<double> values);

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
    static Tensor scalar(double value) { return Tensor({1}, {value}); }
    static Tensor vector(std::vector<double> values);
    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    /// Leading dimension for rank-2 tensors, 1 for vectors.
    std::size_t rows() const noexcept;
    /// Trailing dimension.
    std::size_t cols() const noexcept;

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    const std::vector<double>& data() const noexcept { return values_; }

    double operator[](std::size_t i) const noexcept { return values_[i]; }
    double& operator[](std::size_t i) noexcept { return values_[i]; }
    double at(std::size_t r, std::size_t c) const noexcept { return values_[r * cols() + c]; }
    double& at(std::size_t r, std::size_t c) noexcept { return values_[r * cols() + c]; }

    /// Scalar value of a size-1 tensor; throws DimensionError otherwise.
    double item() const;

    bool all_finite() const noexcept;
    void fill(double value) noexcept;

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    Shape shape_;
    std::vector<double> values_;
};

} // namespace dlab::ad
