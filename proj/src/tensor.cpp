#include "advhar/tensor.hpp"

#include "advhar/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace advhar {

std::size_t shape_size(const Shape &shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

std::string shape_string(const Shape &shape) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i > 0) {
            out << " x ";
        }
        out << shape[i];
    }
    out << ']';
    return out.str();
}

namespace {

void check_extents(const Shape &shape) {
    if (std::find(shape.begin(), shape.end(), std::size_t{0}) != shape.end()) {
        throw ShapeError("tensor extents must be positive, got " + shape_string(shape));
    }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
    check_extents(shape_);
    data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_extents(shape_);
    if (shape_size(shape_) != data_.size()) {
        throw ShapeError("tensor of shape " + shape_string(shape_) + " cannot hold " + std::to_string(data_.size()) +
                         " values");
    }
}

Tensor Tensor::scalar(double value) { return Tensor(Shape{}, std::vector<double>{value}); }

Tensor Tensor::vector(std::vector<double> values) {
    const std::size_t n = values.size();
    return Tensor(Shape{n}, std::move(values));
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= shape_.size()) {
        throw ShapeError("axis " + std::to_string(axis) + " out of range for " + shape_string(shape_));
    }
    return shape_[axis];
}

double Tensor::item() const {
    if (data_.size() != 1) {
        throw ContractError("item() requires a single-element tensor, got " + shape_string(shape_));
    }
    return data_.front();
}

Tensor Tensor::reshaped(Shape shape) const { return Tensor(std::move(shape), data_); }

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace advhar
