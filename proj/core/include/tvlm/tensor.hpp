#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tvlm/errors.hpp"

namespace tvlm {

using Shape = std::vector<std::int64_t>;

std::string shape_str(const Shape& s);

// Dense row-major tensor of doubles. Invariant: data.size() == product(shape),
// and every stored value is finite after each operation (ops enforce this).
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape);
    Tensor(Shape shape, std::vector<double> values);

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
    static Tensor full(Shape shape, double v);
    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    const Shape& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }
    // dim(-1) is the last axis.
    std::int64_t dim(int i) const;

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
    double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

    // Row-major element access for 2d/3d tensors.
    double& at2(std::int64_t r, std::int64_t c);
    double at2(std::int64_t r, std::int64_t c) const;

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
    bool is_scalar() const { return numel() == 1; }
    double scalar_value() const;

    void fill(double v);
    std::string shape_string() const { return shape_str(shape_); }

    // Throws NonFiniteError naming `op` if any element is NaN/inf.
    void check_finite(const char* op) const;

private:
    Shape shape_;
    std::vector<double> data_;
};

std::int64_t shape_numel(const Shape& s);

}  // namespace tvlm
