#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sgca/error.hpp"

namespace sgca {

// Dense row-major matrix of 64-bit floats. All training math runs in
// doubles; the embedding file format narrows to 32-bit at the I/O boundary.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  std::size_t size() const { return rows * cols; }

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  double* row_ptr(std::size_t r) { return data.data() + r * cols; }
  const double* row_ptr(std::size_t r) const { return data.data() + r * cols; }

  bool same_shape(const Matrix& o) const {
    return rows == o.rows && cols == o.cols;
  }

  void fill(double v) { data.assign(data.size(), v); }

  std::string shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
  }

  static Matrix zeros_like(const Matrix& m) { return Matrix(m.rows, m.cols); }
};

inline bool all_finite(const Matrix& m) {
  for (double v : m.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

// A value with its accumulated gradient of the scalar loss. Backward passes
// add into grad; zero_grad resets the accumulator.
struct DualTensor {
  Matrix value;
  Matrix grad;

  DualTensor() = default;
  explicit DualTensor(Matrix v) : value(std::move(v)) {
    grad = Matrix(value.rows, value.cols);
  }

  void zero_grad() { grad.fill(0.0); }
};

}  // namespace sgca
