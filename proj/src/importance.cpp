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

#include "wlra/importance.hpp"

#include <cmath>
#include <string>

#include "wlra/errors.hpp"

namespace wlra {

ImportanceMatrix fisher_from_gradients(std::span<const DenseMatrix> per_example_grads) {
  if (per_example_grads.empty()) {
    throw InputError("fisher_from_gradients: empty gradient sequence");
  }
  const DenseMatrix& first = per_example_grads[0];
  DenseMatrix acc(first.rows(), first.cols(), 0.0);
  for (const DenseMatrix& g : per_example_grads) {
    if (!g.same_shape(first)) {
      throw ShapeError("fisher_from_gradients: gradient shape mismatch");
    }
    const double* p = g.data();
    double* a = acc.data();
    for (std::size_t k = 0; k < acc.size(); ++k) a[k] += p[k] * p[k];
  }
  const double inv = 1.0 / static_cast<double>(per_example_grads.size());
  for (std::size_t k = 0; k < acc.size(); ++k) acc.data()[k] *= inv;
  validate_importance(acc);
  return acc;
}

ImportanceMatrix taylor_importance(const DenseMatrix& w, const DenseMatrix& mean_abs_grad) {
  if (!w.same_shape(mean_abs_grad)) {
    throw ShapeError("taylor_importance: shape mismatch");
  }
  DenseMatrix out(w.rows(), w.cols());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out.data()[k] = std::abs(mean_abs_grad.data()[k] * w.data()[k]);
  }
  validate_importance(out);
  return out;
}

RowImportance row_reduce(const ImportanceMatrix& imp) {
  RowImportance out;
  out.values.resize(imp.rows());
  out.sqrt_diag.resize(imp.rows());
  for (std::size_t i = 0; i < imp.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < imp.cols(); ++j) s += imp(i, j);
    out.values[i] = s;
    out.sqrt_diag[i] = std::sqrt(s);
  }
  return out;
}

PhiReport phi_metric(const ImportanceMatrix& imp, double p, double epsilon) {
  if (p < 1.0) throw InputError("phi_metric: p must be >= 1");
  if (!(epsilon > 0.0)) throw InputError("phi_metric: epsilon must be > 0");

  double norm = 0.0;
  if (p == 2.0) {
    norm = std::sqrt(frobenius_sq(imp));
  } else {
    double acc = 0.0;
    for (double v : imp.values()) acc += std::pow(std::abs(v), p);
    norm = std::pow(acc, 1.0 / p);
  }
  const double denom = std::max(norm, epsilon);

  const double n = static_cast<double>(imp.size());
  double mean = 0.0;
  for (double v : imp.values()) mean += v / denom;
  mean /= n;
  double var = 0.0;
  for (double v : imp.values()) {
    const double d = v / denom - mean;
    var += d * d;
  }
  var /= n;

  PhiReport report;
  report.phi = var;
  report.p = p;
  report.epsilon = epsilon;
  return report;
}

ImportanceMatrix uniform_importance(std::size_t rows, std::size_t cols) {
  return DenseMatrix(rows, cols, 1.0);
}

void validate_importance(const ImportanceMatrix& imp) {
  for (double v : imp.values()) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InputError("importance entries must be finite and nonnegative");
    }
  }
}

}  // namespace wlra
