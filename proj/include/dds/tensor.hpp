#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "dds/common.hpp"

namespace dds {

// Flat 64-bit float buffer with an explicit shape. Shape product must equal
// the data length; helpers validate finiteness at module boundaries.
struct Tensor {
  std::vector<size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<size_t> s, std::vector<double> d)
      : shape(std::move(s)), data(std::move(d)) {
    check_shape();
  }

  static Tensor zeros(std::initializer_list<size_t> s) {
    std::vector<size_t> shape(s);
    size_t n = 1;
    for (size_t d : shape) n *= d;
    return Tensor(std::move(shape), std::vector<double>(n, 0.0));
  }

  size_t size() const { return data.size(); }

  size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  double& at(size_t r, size_t c) { return data[r * cols() + c]; }
  double at(size_t r, size_t c) const { return data[r * cols() + c]; }

  void check_shape() const {
    size_t n = 1;
    for (size_t d : shape) {
      if (d == 0) throw ConfigError("tensor shape has a zero dimension");
      n *= d;
    }
    if (n != data.size())
      throw ConfigError("tensor shape product " + std::to_string(n) +
                        " does not match data length " +
                        std::to_string(data.size()));
  }

  void check_finite(const std::string& what) const {
    for (double v : data)
      if (!std::isfinite(v))
        throw NumericError("non-finite value in " + what);
  }
};

inline bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace dds
