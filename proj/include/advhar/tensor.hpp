#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace advhar {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape &shape);
std::string shape_string(const Shape &shape);

/// Dense row-major array of doubles. A rank-0 tensor (empty shape) holds one scalar.
class Tensor {
  public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> data);

    static Tensor scalar(double value);
    static Tensor vector(std::vector<double> values);

    const Shape &shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    const std::vector<double> &values() const noexcept { return data_; }

    double &operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    /// Value of a single-element tensor.
    double item() const;

    /// Same data under a new shape with equal element count.
    Tensor reshaped(Shape shape) const;

    void fill(double value);
    bool all_finite() const noexcept;

    friend bool operator==(const Tensor &, const Tensor &) = default;

  private:
    Shape shape_;
    std::vector<double> data_;
};

}  // namespace advhar
