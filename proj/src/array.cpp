#include "trajflow/array.hpp"

#include <cmath>
#include <string>

namespace trajflow {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Array::Array(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {}

Array::Array(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_product(shape_) != data_.size()) {
        throw ShapeError("Array: shape " + shape_str(shape_) + " does not match buffer of " +
                         std::to_string(data_.size()) + " elements");
    }
}

Array Array::zeros(std::vector<std::size_t> shape) { return Array(std::move(shape)); }

Array Array::full(std::vector<std::size_t> shape, double value) {
    Array a(std::move(shape));
    for (auto& x : a.data_) x = value;
    return a;
}

Array Array::scalar(double value) { return Array({}, {value}); }

double Array::scalar_value() const {
    if (size() != 1) {
        throw ShapeError("Array: scalar_value on shape " + shape_str(shape_));
    }
    return data_[0];
}

bool Array::all_finite() const {
    for (double x : data_) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace trajflow
