// Dense row-major matrix of doubles; just enough for feature sequences.
#pragma once

#include <cstddef>
#include <vector>

namespace mbc {

struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> v;  // rows x cols, row-major

  Matrix() = default;
  Matrix(size_t r, size_t c) : rows(r), cols(c), v(r * c, 0.0) {}

  double& at(size_t r, size_t c) { return v[r * cols + c]; }
  double at(size_t r, size_t c) const { return v[r * cols + c]; }
  double* row(size_t r) { return v.data() + r * cols; }
  const double* row(size_t r) const { return v.data() + r * cols; }
};

}  // namespace mbc
