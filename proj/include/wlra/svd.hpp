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

#include <cstddef>
#include <vector>

#include "wlra/matrix.hpp"

namespace wlra {

// Thin SVD of an N x M matrix: W = U * diag(s) * V^T with l = min(N, M).
// Columns of U (N x l) and V (M x l) are orthonormal, s is sorted
// non-increasing, and the first nonzero entry of each column of U is
// nonnegative so that the factorization is reproducible.
struct SvdResult {
  DenseMatrix u;
  std::vector<double> s;
  DenseMatrix v;
};

// Rank-r factor pair with a (N x r), b (r x M) and a*b approximating the
// original matrix.
struct FactorPair {
  DenseMatrix a;
  DenseMatrix b;
  std::size_t rank = 0;
};

// Full thin SVD via one-sided Jacobi rotations. Deterministic: equal inputs
// produce bitwise-equal outputs.
SvdResult svd_full(const DenseMatrix& w);

// Keeps the leading r singular triples: a = U_r * diag(s_r), b = V_r^T.
FactorPair svd_truncate(const SvdResult& full, std::size_t r);

// a * b for a factor pair.
DenseMatrix reconstruct(const FactorPair& f);

// Sum of the discarded squared singular values, sigma_{r+1}^2 + ... +
// sigma_l^2; by Eckart-Young this is the unweighted squared error of the
// rank-r truncation.
double discarded_spectrum_sq(const SvdResult& full, std::size_t r);

}  // namespace wlra
