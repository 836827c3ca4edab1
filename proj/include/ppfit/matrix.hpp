#pragma once

#include <cstddef>
#include <vector>

namespace ppfit {

// Dense row-major matrix. Rows are observations, columns covariates.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

  double& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }

  const double* row(int r) const { return a.data() + static_cast<std::size_t>(r) * cols; }
  double* row(int r) { return a.data() + static_cast<std::size_t>(r) * cols; }
};

}  // namespace ppfit
