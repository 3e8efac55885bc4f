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

#pragma once

#include <span>
#include <vector>

#include "wlra/matrix.hpp"

namespace wlra {

// Per-element importance of a weight matrix: nonnegative, finite, same shape
// as the matrix it scores. Stored as a plain DenseMatrix; producers below
// guarantee the invariants, validate_importance() checks foreign inputs.
using ImportanceMatrix = DenseMatrix;

// Row-collapsed importance: values[i] is the sum of row i of the source
// matrix, sqrt_diag[i] its square root. diag(sqrt_diag) is the scaling used
// by the closed-form row-weighted solver.
struct RowImportance {
  std::vector<double> values;
  std::vector<double> sqrt_diag;
};

// Variance of the p-normalized importance entries. Large values flag
// matrices whose entries matter very unevenly, i.e. where plain truncated
// SVD tends to hurt.
struct PhiReport {
  double phi = 0.0;
  double p = 2.0;
  double epsilon = 1e-12;
};

// Mean of elementwise squared gradients over the batch.
ImportanceMatrix fisher_from_gradients(std::span<const DenseMatrix> per_example_grads);

// |mean_abs_grad .* w| elementwise; the caller supplies the per-element mean
// absolute gradient over its batch.
ImportanceMatrix taylor_importance(const DenseMatrix& w, const DenseMatrix& mean_abs_grad);

RowImportance row_reduce(const ImportanceMatrix& imp);

// phi = population variance of the entries of imp / max(||imp||_p, epsilon),
// with the entrywise p-norm taken over all elements.
PhiReport phi_metric(const ImportanceMatrix& imp, double p = 2.0, double epsilon = 1e-12);

ImportanceMatrix uniform_importance(std::size_t rows, std::size_t cols);

// Throws on negative or non-finite entries.
void validate_importance(const ImportanceMatrix& imp);

}  // namespace wlra
