#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "trajflow/errors.hpp"

namespace trajflow {

// Dense row-major array of 64-bit floats. Shapes are explicit; the only
// broadcasting anywhere in the library is scalar-with-array, implemented by
// the individual kernels. Arrays are plain values: copy/move do what vectors
// do, and code that holds a const Array& may be run from any thread.
class Array {
public:
    Array() = default;

    explicit Array(std::vector<std::size_t> shape);
    Array(std::vector<std::size_t> shape, std::vector<double> data);

    static Array zeros(std::vector<std::size_t> shape);
    static Array full(std::vector<std::size_t> shape, double value);
    static Array scalar(double value);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t ndim() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t dim(std::size_t i) const { return shape_[i]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // 2-D accessors (row-major).
    double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

    bool same_shape(const Array& other) const { return shape_ == other.shape_; }
    bool is_scalar() const { return size() == 1; }
    double scalar_value() const;

    bool all_finite() const;

    const std::vector<double>& vec() const { return data_; }

    bool operator==(const Array& other) const {
        return shape_ == other.shape_ && data_ == other.data_;
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

std::size_t shape_product(const std::vector<std::size_t>& shape);
std::string shape_str(const std::vector<std::size_t>& shape);

}  // namespace trajflow
