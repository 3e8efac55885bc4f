// Copyright 2026 The WLRA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wlra/matrix.hpp"

#include <cmath>
#include <string>

#include "wlra/errors.hpp"

namespace wlra {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (rows == 0 || cols == 0) {
    throw InputError("matrix dimensions must be at least 1x1");
  }
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows == 0 || cols == 0) {
    throw InputError("matrix dimensions must be at least 1x1");
  }
  if (data_.size() != rows * cols) {
    throw InputError("matrix data length " + std::to_string(data_.size()) +
                     " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  if (rows.size() == 0) throw InputError("matrix needs at least one row");
  const std::size_t n = rows.size();
  const std::size_t m = rows.begin()->size();
  DenseMatrix out(n, m);
  std::size_t i = 0;
  for (const auto& r : rows) {
    if (r.size() != m) throw ShapeError("ragged initializer rows");
    std::size_t j = 0;
    for (double v : r) out(i, j++) = v;
    ++i;
  }
  return out;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

bool DenseMatrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  }
  return out;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  DenseMatrix c(a.rows(), b.cols(), 0.0);
  // i-k-j loop order keeps the inner traversal contiguous for row-major data.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* brow = b.data() + k * b.cols();
      double* crow = c.data() + i * c.cols();
      for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

double frobenius_sq(const DenseMatrix& m) {
  double s = 0.0;
  for (double v : m.values()) s += v * v;
  return s;
}

double frobenius_sq_diff(const DenseMatrix& a, const DenseMatrix& b) {
  if (!a.same_shape(b)) throw ShapeError("frobenius_sq_diff: shape mismatch");
  double s = 0.0;
  const double* pa = a.data();
  const double* pb = b.data();
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = pa[k] - pb[k];
    s += d * d;
  }
  return s;
}

void require_finite(const DenseMatrix& m, const char* what) {
  if (!m.all_finite()) {
    throw InputError(std::string(what) + ": non-finite entries");
  }
}

}  // namespace wlra
