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

#include "wlra/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "wlra/errors.hpp"

namespace wlra {
namespace {

// Convergence threshold for a column pair, relative to the product of the
// column norms. One-sided Jacobi leaves |u_p . u_q| below this bound.
constexpr double kPairTol = 1e-15;
constexpr int kMaxSweeps = 128;

double column_dot(const DenseMatrix& x, std::size_t p, std::size_t q) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) s += x(i, p) * x(i, q);
  return s;
}

// One-sided Jacobi (Hestenes) on an n x m matrix with n >= m: rotates column
// pairs until they are mutually orthogonal. V accumulates the rotations.
void jacobi_orthogonalize(DenseMatrix& x, DenseMatrix& v) {
  const std::size_t m = x.cols();
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < m; ++p) {
      for (std::size_t q = p + 1; q < m; ++q) {
        const double alpha = column_dot(x, p, p);
        const double beta = column_dot(x, q, q);
        const double gamma = column_dot(x, p, q);
        if (std::abs(gamma) <= kPairTol * std::sqrt(alpha * beta)) continue;
        // Rotation angle zeroing the off-diagonal of the 2x2 Gram block.
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < x.rows(); ++i) {
          const double xp = x(i, p);
          const double xq = x(i, q);
          x(i, p) = c * xp - s * xq;
          x(i, q) = s * xp + c * xq;
        }
        for (std::size_t i = 0; i < v.rows(); ++i) {
          const double vp = v(i, p);
          const double vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
        rotated = true;
      }
    }
    if (!rotated) break;
  }
}

// Fills column j of u with a unit vector orthogonal to columns 0..j-1,
// chosen deterministically by Gram-Schmidt over the canonical basis.
void complete_basis_column(DenseMatrix& u, std::size_t j) {
  const std::size_t n = u.rows();
  std::vector<double> cand(n);
  for (std::size_t e = 0; e < n; ++e) {
    std::fill(cand.begin(), cand.end(), 0.0);
    cand[e] = 1.0;
    for (std::size_t k = 0; k < j; ++k) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += cand[i] * u(i, k);
      for (std::size_t i = 0; i < n; ++i) cand[i] -= dot * u(i, k);
    }
    double norm_sq = 0.0;
    for (double vv : cand) norm_sq += vv * vv;
    if (norm_sq > 0.25) {
      const double inv = 1.0 / std::sqrt(norm_sq);
      for (std::size_t i = 0; i < n; ++i) u(i, j) = cand[i] * inv;
      return;
    }
  }
  throw InputError("svd: could not complete orthonormal basis");
}

void apply_sign_convention(DenseMatrix& u, DenseMatrix& v) {
  for (std::size_t j = 0; j < u.cols(); ++j) {
    double first = 0.0;
    for (std::size_t i = 0; i < u.rows(); ++i) {
      if (u(i, j) != 0.0) {
        first = u(i, j);
        break;
      }
    }
    if (first < 0.0) {
      for (std::size_t i = 0; i < u.rows(); ++i) u(i, j) = -u(i, j);
      for (std::size_t i = 0; i < v.rows(); ++i) v(i, j) = -v(i, j);
    }
  }
}

}  // namespace

SvdResult svd_full(const DenseMatrix& w) {
  require_finite(w, "svd_full");
  const bool transpose = w.rows() < w.cols();
  DenseMatrix x = transpose ? w.transposed() : w;  // n x m with n >= m
  const std::size_t n = x.rows();
  const std::size_t m = x.cols();

  DenseMatrix v = DenseMatrix::identity(m);
  jacobi_orthogonalize(x, v);

  std::vector<double> sigma(m);
  for (std::size_t j = 0; j < m; ++j) sigma[j] = std::sqrt(column_dot(x, j, j));

  // Stable sort keeps the algorithm's order for tied singular values.
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

  const double sigma_max = sigma.empty() ? 0.0 : sigma[order[0]];
  // Below this cutoff the rotated column carries no usable direction; the
  // relative pair tolerance underflows well before it.
  const double zero_cut = sigma_max * 1e-250;

  DenseMatrix u_sorted(n, m);
  DenseMatrix v_sorted(m, m);
  std::vector<double> s_sorted(m);
  std::vector<std::size_t> degenerate;
  for (std::size_t jj = 0; jj < m; ++jj) {
    const std::size_t src = order[jj];
    s_sorted[jj] = sigma[src];
    for (std::size_t i = 0; i < m; ++i) v_sorted(i, jj) = v(i, src);
    if (sigma[src] > zero_cut && sigma[src] > 0.0) {
      const double inv = 1.0 / sigma[src];
      for (std::size_t i = 0; i < n; ++i) u_sorted(i, jj) = x(i, src) * inv;
    } else {
      degenerate.push_back(jj);
    }
  }
  for (std::size_t jj : degenerate) complete_basis_column(u_sorted, jj);

  apply_sign_convention(u_sorted, v_sorted);

  SvdResult out;
  if (transpose) {
    out.u = std::move(v_sorted);
    out.v = std::move(u_sorted);
    // The sign convention is defined on U; redo it after the swap.
    apply_sign_convention(out.u, out.v);
  } else {
    out.u = std::move(u_sorted);
    out.v = std::move(v_sorted);
  }
  out.s = std::move(s_sorted);
  return out;
}

FactorPair svd_truncate(const SvdResult& full, std::size_t r) {
  const std::size_t l = full.s.size();
  if (r < 1 || r > l) {
    throw RankError("svd_truncate: rank " + std::to_string(r) + " outside [1, " +
                    std::to_string(l) + "]");
  }
  const std::size_t n = full.u.rows();
  const std::size_t m = full.v.rows();
  FactorPair f;
  f.rank = r;
  f.a = DenseMatrix(n, r);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < r; ++j) f.a(i, j) = full.u(i, j) * full.s[j];
  }
  f.b = DenseMatrix(r, m);
  for (std::size_t j = 0; j < r; ++j) {
    for (std::size_t i = 0; i < m; ++i) f.b(j, i) = full.v(i, j);
  }
  return f;
}

DenseMatrix reconstruct(const FactorPair& f) { return matmul(f.a, f.b); }

double discarded_spectrum_sq(const SvdResult& full, std::size_t r) {
  double s = 0.0;
  for (std::size_t i = r; i < full.s.size(); ++i) s += full.s[i] * full.s[i];
  return s;
}

}  // namespace wlra
