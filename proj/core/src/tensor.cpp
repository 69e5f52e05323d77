#include "tvlm/tensor.hpp"

#include <cmath>
#include <sstream>

namespace tvlm {

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << ",";
        os << s[i];
    }
    os << "]";
    return os.str();
}

std::int64_t shape_numel(const Shape& s) {
    std::int64_t n = 1;
    for (auto d : s) {
        if (d < 0) throw ShapeError("negative dimension in shape " + shape_str(s));
        n *= d;
    }
    return n;
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<std::size_t>(shape_numel(shape_)), 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(std::move(shape)), data_(std::move(values)) {
    if (static_cast<std::int64_t>(data_.size()) != shape_numel(shape_)) {
        throw ShapeError("value count " + std::to_string(data_.size()) + " does not match shape " + shape_str(shape_));
    }
}

Tensor Tensor::full(Shape shape, double v) {
    Tensor t(std::move(shape));
    t.fill(v);
    return t;
}

std::int64_t Tensor::dim(int i) const {
    const int r = rank();
    if (i < 0) i += r;
    if (i < 0 || i >= r) throw ShapeError("axis " + std::to_string(i) + " out of range for shape " + shape_string());
    return shape_[static_cast<std::size_t>(i)];
}

double& Tensor::at2(std::int64_t r, std::int64_t c) {
    return data_[static_cast<std::size_t>(r * dim(-1) + c)];
}

double Tensor::at2(std::int64_t r, std::int64_t c) const {
    return data_[static_cast<std::size_t>(r * dim(-1) + c)];
}

double Tensor::scalar_value() const {
    if (!is_scalar()) throw ShapeError("expected scalar, got shape " + shape_string());
    return data_[0];
}

void Tensor::fill(double v) {
    for (auto& x : data_) x = v;
}

void Tensor::check_finite(const char* op) const {
    for (double x : data_) {
        if (!std::isfinite(x)) {
            throw NonFiniteError(std::string("non-finite value produced by op '") + op + "'");
        }
    }
}

}  // namespace tvlm
