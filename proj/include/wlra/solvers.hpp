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
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "wlra/importance.hpp"
#include "wlra/matrix.hpp"
#include "wlra/svd.hpp"

namespace wlra {

// Rank-r approximation of w under elementwise importance, minimizing
//   J(A,B) = sum_ij imp_ij (w_ij - a_i . b_j)^2
//          + lambda (sum_i ||a_i||^2 + sum_j ||b_j||^2).
struct WeightedProblem {
  DenseMatrix w;
  ImportanceMatrix importance;
  double lambda = 0.0;
  std::size_t rank = 1;
};

enum class Method { kSvd, kFwsvd, kAls, kSgd, kAdam, kAdamSgd };
enum class InitKind { kSvdWarm, kFwsvdWarm, kRandom };
enum class Phase { kAdam, kSgd, kAls, kClosedForm };

const char* method_name(Method m);
const char* phase_name(Phase p);
std::optional<Method> method_from_name(const std::string& name);

struct SolverConfig {
  Method method = Method::kAdamSgd;
  double eta = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::size_t max_steps = 50000;
  double tol_rel = 1e-9;
  std::size_t window = 100;
  std::uint64_t seed = 42;
  // Coordinates sampled per SGD step; 0 means one full N*M-coordinate pass.
  std::size_t sgd_batch = 0;
  double soft_threshold_factor = 10.0;
  InitKind init = InitKind::kSvdWarm;
};

struct TraceStep {
  std::size_t step = 0;
  double loss = 0.0;        // full objective, L2 term included
  double resid = 0.0;       // weighted residual only; this is what the
                            // hard threshold is compared against
  double unweighted = 0.0;  // ||W - AB||_F^2
  Phase phase = Phase::kAdam;
  bool degenerate = false;  // an ALS solve fell back to the pseudo-inverse
};

struct SolverTrace {
  std::vector<TraceStep> steps;
  std::optional<std::size_t> switch_step;
  double hard_threshold = std::numeric_limits<double>::quiet_NaN();
  double soft_threshold = std::numeric_limits<double>::quiet_NaN();
  FactorPair final;
  std::size_t total_steps = 0;
  double wall_time_seconds = 0.0;
};

void validate_problem(const WeightedProblem& p);
void validate_config(const SolverConfig& cfg);

double weighted_loss(const WeightedProblem& p, const FactorPair& f);

// dJ/dA and dJ/dB:
//   dJ/da_i = -2 sum_j e_ij b_j + 2 lambda a_i,   e_ij = imp_ij (w_ij - a_i.b_j)
//   dJ/db_j = -2 sum_i e_ij a_i + 2 lambda b_j
void weighted_grad(const WeightedProblem& p, const FactorPair& f, DenseMatrix* grad_a,
                   DenseMatrix* grad_b);

// Closed-form row-weighted solution: collapses importance to row sums,
// runs plain SVD on diag(sqrt(rowsum)) * W and un-scales. The returned
// threshold is the achieved row-weighted objective
// ||diag(sqrt(rowsum)) (W - AB)||_F^2, the switching point of the hybrid
// optimizer. Zero row sums are clamped at 1e-12 before inversion.
struct FwsvdResult {
  FactorPair factors;
  double hard_threshold = 0.0;
};
FwsvdResult solve_fwsvd(const WeightedProblem& p);

enum class AlsSide { kRowsOfA, kColsOfB };

// One alternating-least-squares half sweep: re-solves every row of A (or
// every column of B) from its weighted normal equations, leaving the other
// factor fixed. Rows are mutually independent, so threads > 1 splits them
// across threads with results identical to the serial run. Singular normal
// matrices at lambda=0 fall back to the minimum-norm pseudo-solution;
// *degenerate_solves counts those.
FactorPair als_half_sweep(const WeightedProblem& p, const FactorPair& f, AlsSide side,
                          int threads = 1, std::size_t* degenerate_solves = nullptr);

SolverTrace solve_sgd(const WeightedProblem& p, const FactorPair& f0, const SolverConfig& cfg);
SolverTrace solve_adam(const WeightedProblem& p, const FactorPair& f0, const SolverConfig& cfg);

// Adam until the first step whose weighted residual drops below the
// closed-form threshold while the unweighted error stays within
// soft_threshold_factor times the truncated-SVD error, then plain SGD with
// fresh state. switch_step is absent when Adam never meets the condition.
SolverTrace solve_adam_sgd(const WeightedProblem& p, const FactorPair& f0,
                           const SolverConfig& cfg);
SolverTrace solve_als(const WeightedProblem& p, const FactorPair& f0, const SolverConfig& cfg);

// Builds the initial factors per cfg.init and dispatches on cfg.method.
SolverTrace solve(const WeightedProblem& p, const SolverConfig& cfg);

// One JSON object per logged step: {"step":..,"loss":..,"unweighted":..,"phase":".."}.
void write_trace_jsonl(const SolverTrace& trace, std::ostream& out);

// Seeded heterogeneous fixture used by the optimizer benchmark: Gaussian
// target with a decaying planted spectrum, lognormal elementwise importance.
WeightedProblem make_benchmark_problem(std::size_t rows, std::size_t cols, std::size_t rank,
                                       std::uint64_t seed);

}  // namespace wlra
