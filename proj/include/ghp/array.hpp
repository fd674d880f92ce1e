#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ghp {

// Dense row-major array of doubles. Rank 0..2 is all the models need:
// vectors are {n}, batches are {rows, cols}, scalars are {1}.
struct Array {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Array() = default;
  Array(std::vector<std::size_t> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
    if (numel(shape) != data.size()) throw std::invalid_argument("Array: shape/data size mismatch");
  }

  static std::size_t numel(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (auto d : s) n *= d;
    return s.empty() ? 1 : n;
  }

  static Array zeros(std::vector<std::size_t> s) {
    std::size_t n = numel(s);
    return Array(std::move(s), std::vector<double>(n, 0.0));
  }
  static Array full(std::vector<std::size_t> s, double v) {
    std::size_t n = numel(s);
    return Array(std::move(s), std::vector<double>(n, v));
  }
  static Array scalar(double v) { return Array({1}, {v}); }
  static Array vec(std::vector<double> d) {
    std::size_t n = d.size();
    return Array({n}, std::move(d));
  }
  static Array matrix(std::size_t rows, std::size_t cols, std::vector<double> d) {
    return Array({rows, cols}, std::move(d));
  }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  // rank-1 arrays count as a single row
  std::size_t rows() const { return rank() == 2 ? shape[0] : 1; }
  std::size_t cols() const { return rank() == 2 ? shape[1] : size(); }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }
  double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

  bool same_shape(const Array& o) const { return shape == o.shape; }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  std::string shape_str() const {
    std::string s = "{";
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(shape[i]);
    }
    return s + "}";
  }
};

inline bool all_finite(std::span<const double> xs) {
  for (double v : xs)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace ghp
