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

#include "wlra/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <thread>

#include "wlra/errors.hpp"

namespace wlra {
namespace {

constexpr double kDivergenceCap = 1e12;
constexpr double kRowSumClamp = 1e-12;

struct EvalResult {
  double resid = 0.0;       // sum imp (w - ab)^2
  double unweighted = 0.0;  // sum (w - ab)^2
  double reg = 0.0;         // lambda * (||A||^2 + ||B||^2)
  double loss() const { return resid + reg; }
};

// Computes the weighted residual matrix e_ij = imp_ij (w_ij - a_i.b_j) into
// *e (may be null) along with the loss pieces.
EvalResult evaluate(const WeightedProblem& p, const FactorPair& f, DenseMatrix* e) {
  const std::size_t n = p.w.rows();
  const std::size_t m = p.w.cols();
  const std::size_t r = f.rank;
  EvalResult out;
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = f.a.data() + i * r;
    for (std::size_t j = 0; j < m; ++j) {
      double ab = 0.0;
      for (std::size_t t = 0; t < r; ++t) ab += arow[t] * f.b(t, j);
      const double d = p.w(i, j) - ab;
      const double imp = p.importance(i, j);
      out.unweighted += d * d;
      out.resid += imp * d * d;
      if (e != nullptr) (*e)(i, j) = imp * d;
    }
  }
  if (p.lambda > 0.0) {
    out.reg = p.lambda * (frobenius_sq(f.a) + frobenius_sq(f.b));
  }
  return out;
}

// Solves the r x r SPD system G x = rhs by unpivoted Cholesky. Returns false
// when a pivot is not safely positive.
bool cholesky_solve(std::vector<double>& g, std::vector<double>& x,
                    const std::vector<double>& rhs, std::size_t r) {
  double max_diag = 0.0;
  for (std::size_t i = 0; i < r; ++i) max_diag = std::max(max_diag, std::abs(g[i * r + i]));
  const double pivot_floor = max_diag * 1e-13;
  // In-place lower Cholesky.
  for (std::size_t k = 0; k < r; ++k) {
    double d = g[k * r + k];
    for (std::size_t t = 0; t < k; ++t) d -= g[k * r + t] * g[k * r + t];
    if (!(d > pivot_floor) || !std::isfinite(d)) return false;
    const double lkk = std::sqrt(d);
    g[k * r + k] = lkk;
    for (std::size_t i = k + 1; i < r; ++i) {
      double s = g[i * r + k];
      for (std::size_t t = 0; t < k; ++t) s -= g[i * r + t] * g[k * r + t];
      g[i * r + k] = s / lkk;
    }
  }
  // Forward then backward substitution.
  for (std::size_t i = 0; i < r; ++i) {
    double s = rhs[i];
    for (std::size_t t = 0; t < i; ++t) s -= g[i * r + t] * x[t];
    x[i] = s / g[i * r + i];
  }
  for (std::size_t ii = r; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t t = ii + 1; t < r; ++t) s -= g[t * r + ii] * x[t];
    x[ii] = s / g[ii * r + ii];
  }
  return true;
}

// Minimum-norm solution of the (consistent, PSD) normal equations via the
// pseudo-inverse; used when Cholesky fails at lambda = 0.
void pinv_solve(const std::vector<double>& g, std::vector<double>& x,
                const std::vector<double>& rhs, std::size_t r) {
  DenseMatrix gm(r, r, g);
  SvdResult dec = svd_full(gm);
  const double cutoff = dec.s.empty() ? 0.0 : dec.s[0] * static_cast<double>(r) * 1e-14;
  std::vector<double> uty(r, 0.0);
  for (std::size_t k = 0; k < r; ++k) {
    if (dec.s[k] <= cutoff) continue;
    double dot = 0.0;
    for (std::size_t i = 0; i < r; ++i) dot += dec.u(i, k) * rhs[i];
    uty[k] = dot / dec.s[k];
  }
  for (std::size_t i = 0; i < r; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < r; ++k) s += dec.v(i, k) * uty[k];
    x[i] = s;
  }
}

// Re-solves rows [begin, end) of A from their normal equations.
void als_update_rows(const WeightedProblem& p, const DenseMatrix& b, DenseMatrix& a,
                     std::size_t begin, std::size_t end, std::size_t* degenerate) {
  const std::size_t m = p.w.cols();
  const std::size_t r = b.rows();
  std::vector<double> gram(r * r);
  std::vector<double> work(r * r);
  std::vector<double> rhs(r);
  std::vector<double> x(r);
  for (std::size_t i = begin; i < end; ++i) {
    std::fill(gram.begin(), gram.end(), 0.0);
    std::fill(rhs.begin(), rhs.end(), 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const double d = p.importance(i, j);
      if (d == 0.0) continue;
      const double dw = d * p.w(i, j);
      for (std::size_t t = 0; t < r; ++t) {
        const double bt = b(t, j);
        rhs[t] += dw * bt;
        const double dbt = d * bt;
        for (std::size_t u = t; u < r; ++u) gram[t * r + u] += dbt * b(u, j);
      }
    }
    for (std::size_t t = 0; t < r; ++t) {
      for (std::size_t u = 0; u < t; ++u) gram[t * r + u] = gram[u * r + t];
      gram[t * r + t] += p.lambda;
    }
    work = gram;
    if (!cholesky_solve(work, x, rhs, r)) {
      pinv_solve(gram, x, rhs, r);
      if (degenerate != nullptr) ++*degenerate;
    }
    for (std::size_t t = 0; t < r; ++t) a(i, t) = x[t];
  }
}

// Re-solves columns [begin, end) of B.
void als_update_cols(const WeightedProblem& p, const DenseMatrix& a, DenseMatrix& b,
                     std::size_t begin, std::size_t end, std::size_t* degenerate) {
  const std::size_t n = p.w.rows();
  const std::size_t r = a.cols();
  std::vector<double> gram(r * r);
  std::vector<double> work(r * r);
  std::vector<double> rhs(r);
  std::vector<double> x(r);
  for (std::size_t j = begin; j < end; ++j) {
    std::fill(gram.begin(), gram.end(), 0.0);
    std::fill(rhs.begin(), rhs.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = p.importance(i, j);
      if (d == 0.0) continue;
      const double dw = d * p.w(i, j);
      const double* arow = a.data() + i * r;
      for (std::size_t t = 0; t < r; ++t) {
        rhs[t] += dw * arow[t];
        const double dat = d * arow[t];
        for (std::size_t u = t; u < r; ++u) gram[t * r + u] += dat * arow[u];
      }
    }
    for (std::size_t t = 0; t < r; ++t) {
      for (std::size_t u = 0; u < t; ++u) gram[t * r + u] = gram[u * r + t];
      gram[t * r + t] += p.lambda;
    }
    work = gram;
    if (!cholesky_solve(work, x, rhs, r)) {
      pinv_solve(gram, x, rhs, r);
      if (degenerate != nullptr) ++*degenerate;
    }
    for (std::size_t t = 0; t < r; ++t) b(t, j) = x[t];
  }
}

void check_factor_shapes(const WeightedProblem& p, const FactorPair& f) {
  if (f.a.rows() != p.w.rows() || f.b.cols() != p.w.cols() || f.a.cols() != f.b.rows() ||
      f.a.cols() != f.rank) {
    throw ShapeError("factor pair does not match the problem shape");
  }
}

// Shared per-run bookkeeping: trace recording, stopping rule, divergence.
class RunState {
 public:
  RunState(const WeightedProblem& p, const SolverConfig& cfg)
      : cfg_(cfg), start_(std::chrono::steady_clock::now()) {
    // Machine-noise floor relative to the loss of the zero factorization.
    double scale = 0.0;
    for (std::size_t k = 0; k < p.w.size(); ++k) {
      scale += p.importance.data()[k] * p.w.data()[k] * p.w.data()[k];
    }
    floor_ = 1e-18 * (1.0 + scale);
  }

  // Records a step and returns true when the run should stop. `step` is the
  // index of the state being recorded (number of updates applied so far).
  bool record(std::size_t step, const EvalResult& ev, Phase phase, bool degenerate = false) {
    const double loss = ev.loss();
    if (!std::isfinite(loss) || loss > kDivergenceCap) {
      throw DivergenceError("solver diverged: loss " + std::to_string(loss) + " at step " +
                                std::to_string(step),
                            step);
    }
    trace_.steps.push_back({step, loss, ev.resid, ev.unweighted, phase, degenerate});
    bool stop = false;
    if (loss <= floor_) stop = true;
    if (!history_.empty()) {
      // Compare against the loss recorded `window` steps ago, when present.
      for (auto it = history_.rbegin(); it != history_.rend(); ++it) {
        if (step - it->first >= cfg_.window) {
          const double prev = it->second;
          const double change = std::abs(prev - loss);
          if (change <= cfg_.tol_rel * std::max(prev, 1e-300)) stop = true;
          break;
        }
      }
    }
    history_.emplace_back(step, loss);
    if (history_.size() > 4 * (cfg_.window + 1)) {
      history_.erase(history_.begin(), history_.begin() + static_cast<std::ptrdiff_t>(cfg_.window));
    }
    return stop;
  }

  SolverTrace finish(FactorPair f, std::size_t total_steps) {
    trace_.final = std::move(f);
    trace_.total_steps = total_steps;
    trace_.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return std::move(trace_);
  }

  SolverTrace& trace() { return trace_; }

 private:
  SolverConfig cfg_;
  SolverTrace trace_;
  std::vector<std::pair<std::size_t, double>> history_;
  double floor_ = 0.0;
  std::chrono::steady_clock::time_point start_;
};

// One batch of coordinate SGD updates, Eq.-style sequential order: e is
// computed from the pre-update values, a_i is updated first, then b_j uses
// the fresh a_i with the same e.
void sgd_batch_updates(const WeightedProblem& p, FactorPair& f, std::mt19937_64& rng,
                       std::size_t batch, double eta, std::vector<double>& anew) {
  const std::size_t r = f.rank;
  std::uniform_int_distribution<std::size_t> row_dist(0, p.w.rows() - 1);
  std::uniform_int_distribution<std::size_t> col_dist(0, p.w.cols() - 1);
  for (std::size_t c = 0; c < batch; ++c) {
    const std::size_t i = row_dist(rng);
    const std::size_t j = col_dist(rng);
    double* arow = f.a.data() + i * r;
    double ab = 0.0;
    for (std::size_t t = 0; t < r; ++t) ab += arow[t] * f.b(t, j);
    const double e = p.importance(i, j) * (p.w(i, j) - ab);
    const double two_eta = 2.0 * eta;
    for (std::size_t t = 0; t < r; ++t) {
      anew[t] = arow[t] + two_eta * (e * f.b(t, j) - p.lambda * arow[t]);
    }
    for (std::size_t t = 0; t < r; ++t) {
      f.b(t, j) += two_eta * (e * anew[t] - p.lambda * f.b(t, j));
      arow[t] = anew[t];
    }
  }
}

std::size_t effective_sgd_batch(const WeightedProblem& p, const SolverConfig& cfg) {
  return cfg.sgd_batch == 0 ? p.w.rows() * p.w.cols() : cfg.sgd_batch;
}

// Runs the SGD phase starting at step index `first_step`; shares the trace
// and stopping state with any preceding phase.
FactorPair run_sgd_phase(const WeightedProblem& p, FactorPair f, const SolverConfig& cfg,
                         RunState& state, std::size_t first_step, std::size_t* steps_taken) {
  const std::size_t batch = effective_sgd_batch(p, cfg);
  // A full-pass batch makes per-step evaluation proportionate; small batches
  // are evaluated once per stopping window.
  const std::size_t stride = batch >= p.w.rows() * p.w.cols() ? 1 : cfg.window;
  std::mt19937_64 rng(cfg.seed);
  std::vector<double> anew(f.rank);
  std::size_t step = first_step;
  while (step < cfg.max_steps) {
    sgd_batch_updates(p, f, rng, batch, cfg.eta, anew);
    ++step;
    if ((step - first_step) % stride == 0 || step == cfg.max_steps) {
      const EvalResult ev = evaluate(p, f, nullptr);
      if (state.record(step, ev, Phase::kSgd)) break;
    }
  }
  *steps_taken = step;
  return f;
}

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;
};

// One bias-corrected Adam update over the stacked parameters (all of A,
// then all of B); the epsilon sits inside the square root.
void adam_apply(const SolverConfig& cfg, AdamState& st, FactorPair& f, const DenseMatrix& grad_a,
                const DenseMatrix& grad_b) {
  st.beta1_pow *= cfg.beta1;
  st.beta2_pow *= cfg.beta2;
  const double corr = cfg.eta * std::sqrt(1.0 - st.beta2_pow) / (1.0 - st.beta1_pow);
  const std::size_t na = f.a.size();
  auto update = [&](double* h, const double* g, std::size_t count, std::size_t offset) {
    for (std::size_t k = 0; k < count; ++k) {
      double& mk = st.m[offset + k];
      double& vk = st.v[offset + k];
      mk = cfg.beta1 * mk + (1.0 - cfg.beta1) * g[k];
      vk = cfg.beta2 * vk + (1.0 - cfg.beta2) * g[k] * g[k];
      h[k] -= corr * mk / std::sqrt(vk + cfg.adam_epsilon);
    }
  };
  update(f.a.data(), grad_a.data(), na, 0);
  update(f.b.data(), grad_b.data(), f.b.size(), na);
}

void gradients_from_residual(const WeightedProblem& p, const FactorPair& f, const DenseMatrix& e,
                             const DenseMatrix& bt, DenseMatrix& grad_a, DenseMatrix& grad_b) {
  const std::size_t n = p.w.rows();
  const std::size_t m = p.w.cols();
  const std::size_t r = f.rank;
  // grad_a = -2 E B^T + 2 lambda A
  for (std::size_t i = 0; i < n; ++i) {
    double* garow = grad_a.data() + i * r;
    for (std::size_t t = 0; t < r; ++t) garow[t] = 2.0 * p.lambda * f.a(i, t);
    const double* erow = e.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) {
      const double ev = erow[j];
      if (ev == 0.0) continue;
      const double* btrow = bt.data() + j * r;
      for (std::size_t t = 0; t < r; ++t) garow[t] -= 2.0 * ev * btrow[t];
    }
  }
  // grad_b = -2 A^T E + 2 lambda B
  for (std::size_t t = 0; t < r; ++t) {
    double* gbrow = grad_b.data() + t * m;
    for (std::size_t j = 0; j < m; ++j) gbrow[j] = 2.0 * p.lambda * f.b(t, j);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double* erow = e.data() + i * m;
    const double* arow = f.a.data() + i * r;
    for (std::size_t t = 0; t < r; ++t) {
      const double a_it = arow[t];
      if (a_it == 0.0) continue;
      double* gbrow = grad_b.data() + t * m;
      for (std::size_t j = 0; j < m; ++j) gbrow[j] -= 2.0 * a_it * erow[j];
    }
  }
}

// Shared Adam driver. When `hybrid` is set, checks the switching condition
// before each update and hands the factors over to the SGD phase at the
// first step that satisfies it.
SolverTrace run_adam_family(const WeightedProblem& p, FactorPair f, const SolverConfig& cfg,
                            bool hybrid, double hard_threshold, double soft_threshold) {
  RunState state(p, cfg);
  state.trace().hard_threshold = hard_threshold;
  state.trace().soft_threshold = soft_threshold;

  const std::size_t n = p.w.rows();
  const std::size_t m = p.w.cols();
  DenseMatrix e(n, m);
  DenseMatrix grad_a(f.a.rows(), f.a.cols());
  DenseMatrix grad_b(f.b.rows(), f.b.cols());
  AdamState adam;
  adam.m.assign(f.a.size() + f.b.size(), 0.0);
  adam.v.assign(f.a.size() + f.b.size(), 0.0);

  std::size_t step = 0;
  while (step < cfg.max_steps) {
    const EvalResult ev = evaluate(p, f, &e);
    if (hybrid && ev.resid < hard_threshold && ev.unweighted <= soft_threshold) {
      state.trace().switch_step = step;
      state.record(step, ev, Phase::kSgd);
      std::size_t total = step;
      f = run_sgd_phase(p, std::move(f), cfg, state, step, &total);
      return state.finish(std::move(f), total);
    }
    if (state.record(step, ev, Phase::kAdam)) {
      return state.finish(std::move(f), step);
    }
    const DenseMatrix bt = f.b.transposed();
    gradients_from_residual(p, f, e, bt, grad_a, grad_b);
    adam_apply(cfg, adam, f, grad_a, grad_b);
    ++step;
  }
  // Record the state reached by the final update.
  const EvalResult ev = evaluate(p, f, nullptr);
  if (hybrid && ev.resid < hard_threshold && ev.unweighted <= soft_threshold &&
      !state.trace().switch_step.has_value()) {
    // Budget exhausted exactly at the crossing; there is no SGD step to run.
    state.trace().switch_step = step;
    state.record(step, ev, Phase::kSgd);
  } else {
    state.record(step, ev, Phase::kAdam);
  }
  return state.finish(std::move(f), step);
}

FactorPair random_init(const WeightedProblem& p, const SolverConfig& cfg) {
  FactorPair f;
  f.rank = p.rank;
  f.a = DenseMatrix(p.w.rows(), p.rank);
  f.b = DenseMatrix(p.rank, p.w.cols());
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(p.rank));
  for (std::size_t k = 0; k < f.a.size(); ++k) f.a.data()[k] = gauss(rng) * scale;
  for (std::size_t k = 0; k < f.b.size(); ++k) f.b.data()[k] = gauss(rng) * scale;
  return f;
}

SolverTrace closed_form_trace(const WeightedProblem& p, FactorPair f, double hard_threshold) {
  RunState state(p, SolverConfig{});
  state.trace().hard_threshold = hard_threshold;
  const EvalResult ev = evaluate(p, f, nullptr);
  state.record(0, ev, Phase::kClosedForm);
  return state.finish(std::move(f), 0);
}

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::kSvd: return "svd";
    case Method::kFwsvd: return "fwsvd";
    case Method::kAls: return "als";
    case Method::kSgd: return "sgd";
    case Method::kAdam: return "adam";
    case Method::kAdamSgd: return "adam_sgd";
  }
  return "?";
}

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::kAdam: return "adam";
    case Phase::kSgd: return "sgd";
    case Phase::kAls: return "als";
    case Phase::kClosedForm: return "closed_form";
  }
  return "?";
}

std::optional<Method> method_from_name(const std::string& name) {
  if (name == "svd") return Method::kSvd;
  if (name == "fwsvd") return Method::kFwsvd;
  if (name == "als") return Method::kAls;
  if (name == "sgd") return Method::kSgd;
  if (name == "adam") return Method::kAdam;
  if (name == "adam_sgd") return Method::kAdamSgd;
  return std::nullopt;
}

void validate_problem(const WeightedProblem& p) {
  require_finite(p.w, "problem target");
  if (!p.w.same_shape(p.importance)) {
    throw ShapeError("importance shape does not match the target matrix");
  }
  validate_importance(p.importance);
  if (!(p.lambda >= 0.0) || !std::isfinite(p.lambda)) {
    throw InputError("lambda must be finite and >= 0");
  }
  const std::size_t l = std::min(p.w.rows(), p.w.cols());
  if (p.rank < 1 || p.rank > l) {
    throw RankError("rank " + std::to_string(p.rank) + " outside [1, " + std::to_string(l) + "]");
  }
}

void validate_config(const SolverConfig& cfg) {
  if (!(cfg.eta > 0.0)) throw InputError("eta must be > 0");
  if (cfg.beta1 < 0.0 || cfg.beta1 >= 1.0) throw InputError("beta1 must be in [0, 1)");
  if (cfg.beta2 < 0.0 || cfg.beta2 >= 1.0) throw InputError("beta2 must be in [0, 1)");
  if (!(cfg.adam_epsilon > 0.0)) throw InputError("adam_epsilon must be > 0");
  if (cfg.max_steps < 1) throw InputError("max_steps must be >= 1");
  if (cfg.window < 1) throw InputError("window must be >= 1");
  if (!(cfg.tol_rel >= 0.0)) throw InputError("tol_rel must be >= 0");
  if (!(cfg.soft_threshold_factor >= 1.0)) {
    throw InputError("soft_threshold_factor must be >= 1");
  }
}

double weighted_loss(const WeightedProblem& p, const FactorPair& f) {
  if (!p.w.same_shape(p.importance)) {
    throw ShapeError("importance shape does not match the target matrix");
  }
  check_factor_shapes(p, f);
  return evaluate(p, f, nullptr).loss();
}

void weighted_grad(const WeightedProblem& p, const FactorPair& f, DenseMatrix* grad_a,
                   DenseMatrix* grad_b) {
  if (!p.w.same_shape(p.importance)) {
    throw ShapeError("importance shape does not match the target matrix");
  }
  check_factor_shapes(p, f);
  DenseMatrix e(p.w.rows(), p.w.cols());
  evaluate(p, f, &e);
  *grad_a = DenseMatrix(f.a.rows(), f.a.cols());
  *grad_b = DenseMatrix(f.b.rows(), f.b.cols());
  const DenseMatrix bt = f.b.transposed();
  gradients_from_residual(p, f, e, bt, *grad_a, *grad_b);
}

FwsvdResult solve_fwsvd(const WeightedProblem& p) {
  validate_problem(p);
  const std::size_t n = p.w.rows();
  RowImportance rows = row_reduce(p.importance);
  std::vector<double> scale(n);
  for (std::size_t i = 0; i < n; ++i) {
    scale[i] = std::sqrt(std::max(rows.values[i], kRowSumClamp));
  }
  DenseMatrix scaled(n, p.w.cols());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p.w.cols(); ++j) scaled(i, j) = scale[i] * p.w(i, j);
  }
  SvdResult dec = svd_full(scaled);
  FactorPair f = svd_truncate(dec, p.rank);
  // Un-scale the left factor: A = diag(1/scale) U_r S_r.
  for (std::size_t i = 0; i < n; ++i) {
    const double inv = 1.0 / scale[i];
    for (std::size_t t = 0; t < p.rank; ++t) f.a(i, t) *= inv;
  }
  // The achieved row-weighted objective, evaluated on the reconstruction.
  const DenseMatrix ab = reconstruct(f);
  double hard = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s2 = scale[i] * scale[i];
    for (std::size_t j = 0; j < p.w.cols(); ++j) {
      const double d = p.w(i, j) - ab(i, j);
      hard += s2 * d * d;
    }
  }
  return {std::move(f), hard};
}

FactorPair als_half_sweep(const WeightedProblem& p, const FactorPair& f, AlsSide side,
                          int threads, std::size_t* degenerate_solves) {
  validate_problem(p);
  check_factor_shapes(p, f);
  FactorPair out = f;
  const std::size_t count = side == AlsSide::kRowsOfA ? p.w.rows() : p.w.cols();
  const int nthreads = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (nthreads == 1) {
    if (side == AlsSide::kRowsOfA) {
      als_update_rows(p, out.b, out.a, 0, count, degenerate_solves);
    } else {
      als_update_cols(p, out.a, out.b, 0, count, degenerate_solves);
    }
    return out;
  }
  std::vector<std::size_t> degenerate(static_cast<std::size_t>(nthreads), 0);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nthreads));
  const std::size_t chunk = (count + static_cast<std::size_t>(nthreads) - 1) /
                            static_cast<std::size_t>(nthreads);
  for (int t = 0; t < nthreads; ++t) {
    const std::size_t begin = static_cast<std::size_t>(t) * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, t, begin, end] {
      if (side == AlsSide::kRowsOfA) {
        als_update_rows(p, out.b, out.a, begin, end, &degenerate[static_cast<std::size_t>(t)]);
      } else {
        als_update_cols(p, out.a, out.b, begin, end, &degenerate[static_cast<std::size_t>(t)]);
      }
    });
  }
  for (auto& th : pool) th.join();
  if (degenerate_solves != nullptr) {
    for (std::size_t d : degenerate) *degenerate_solves += d;
  }
  return out;
}

SolverTrace solve_sgd(const WeightedProblem& p, const FactorPair& f0, const SolverConfig& cfg) {
  validate_problem(p);
  validate_config(cfg);
  check_factor_shapes(p, f0);
  RunState state(p, cfg);
  state.record(0, evaluate(p, f0, nullptr), Phase::kSgd);
  std::size_t total = 0;
  FactorPair f = run_sgd_phase(p, f0, cfg, state, 0, &total);
  return state.finish(std::move(f), total);
}

SolverTrace solve_adam(const WeightedProblem& p, const FactorPair& f0, const SolverConfig& cfg) {
  validate_problem(p);
  validate_config(cfg);
  check_factor_shapes(p, f0);
  return run_adam_family(p, f0, cfg, /*hybrid=*/false, 0.0, 0.0);
}

SolverTrace solve_adam_sgd(const WeightedProblem& p, const FactorPair& f0,
                           const SolverConfig& cfg) {
  validate_problem(p);
  validate_config(cfg);
  check_factor_shapes(p, f0);
  const double hard = solve_fwsvd(p).hard_threshold;
  const double soft =
      cfg.soft_threshold_factor * discarded_spectrum_sq(svd_full(p.w), p.rank);
  return run_adam_family(p, f0, cfg, /*hybrid=*/true, hard, soft);
}

SolverTrace solve_als(const WeightedProblem& p, const FactorPair& f0, const SolverConfig& cfg) {
  validate_problem(p);
  validate_config(cfg);
  check_factor_shapes(p, f0);
  RunState state(p, cfg);
  if (state.record(0, evaluate(p, f0, nullptr), Phase::kAls)) {
    return state.finish(f0, 0);
  }
  FactorPair f = f0;
  std::size_t step = 0;
  AlsSide side = AlsSide::kRowsOfA;
  while (step < cfg.max_steps) {
    std::size_t degenerate = 0;
    f = als_half_sweep(p, f, side, 1, &degenerate);
    side = side == AlsSide::kRowsOfA ? AlsSide::kColsOfB : AlsSide::kRowsOfA;
    ++step;
    const EvalResult ev = evaluate(p, f, nullptr);
    if (state.record(step, ev, Phase::kAls, degenerate > 0)) break;
  }
  return state.finish(std::move(f), step);
}

SolverTrace solve(const WeightedProblem& p, const SolverConfig& cfg) {
  validate_problem(p);
  validate_config(cfg);

  if (cfg.method == Method::kSvd) {
    return closed_form_trace(p, svd_truncate(svd_full(p.w), p.rank),
                             std::numeric_limits<double>::quiet_NaN());
  }
  if (cfg.method == Method::kFwsvd) {
    FwsvdResult res = solve_fwsvd(p);
    return closed_form_trace(p, std::move(res.factors), res.hard_threshold);
  }

  FactorPair f0;
  switch (cfg.init) {
    case InitKind::kSvdWarm: f0 = svd_truncate(svd_full(p.w), p.rank); break;
    case InitKind::kFwsvdWarm: f0 = solve_fwsvd(p).factors; break;
    case InitKind::kRandom: f0 = random_init(p, cfg); break;
  }
  switch (cfg.method) {
    case Method::kAls: return solve_als(p, f0, cfg);
    case Method::kSgd: return solve_sgd(p, f0, cfg);
    case Method::kAdam: return solve_adam(p, f0, cfg);
    case Method::kAdamSgd: return solve_adam_sgd(p, f0, cfg);
    default: break;
  }
  throw InputError("unknown solver method");
}

void write_trace_jsonl(const SolverTrace& trace, std::ostream& out) {
  char buf[160];
  for (const TraceStep& s : trace.steps) {
    std::snprintf(buf, sizeof(buf), "{\"step\":%zu,\"loss\":%.17g,\"unweighted\":%.17g,\"phase\":\"%s\"}\n",
                  s.step, s.loss, s.unweighted, phase_name(s.phase));
    out << buf;
  }
}

WeightedProblem make_benchmark_problem(std::size_t rows, std::size_t cols, std::size_t rank,
                                       std::uint64_t seed) {
  if (rows < 2 || cols < 2) throw InputError("benchmark problem needs at least 2x2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Planted decaying spectrum plus noise, so the rank-r truncation captures
  // real structure but leaves a heavy tail.
  const std::size_t l = std::min(rows, cols);
  const std::size_t planted = std::min(l, rank * 2);
  DenseMatrix w(rows, cols, 0.0);
  std::vector<double> u(rows);
  std::vector<double> v(cols);
  for (std::size_t k = 0; k < planted; ++k) {
    for (auto& x : u) x = gauss(rng);
    for (auto& x : v) x = gauss(rng);
    const double weight = 2.0 / static_cast<double>(k + 1);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) w(i, j) += weight * u[i] * v[j];
    }
  }
  for (std::size_t k = 0; k < w.size(); ++k) w.data()[k] += 0.3 * gauss(rng);

  // Lognormal elementwise importance: heavy within-row variation, which is
  // exactly the regime where the row-collapsed closed form is lossy.
  ImportanceMatrix imp(rows, cols);
  for (std::size_t k = 0; k < imp.size(); ++k) imp.data()[k] = std::exp(1.5 * gauss(rng));

  WeightedProblem p;
  p.w = std::move(w);
  p.importance = std::move(imp);
  p.lambda = 0.0;
  p.rank = rank;
  return p;
}

}  // namespace wlra
