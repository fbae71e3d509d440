// Copyright 2026 The stylematch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "stylematch/sinkhorn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "stylematch/kernels.hpp"

namespace stylematch::sinkhorn {

Measure::Measure(Tensor pts) : points(std::move(pts)) {
  if (points.rank() != 2) throw ShapeError("Measure: points must be n x d");
  if (points.dim(0) < 1) throw ShapeError("Measure: needs at least one point");
  require_finite(points, "Measure");
}

Tensor cost_matrix(const Measure& p, const Measure& q) {
  if (p.dim() != q.dim())
    throw ShapeError("cost_matrix: point dimensions disagree");
  Tensor out({p.size(), q.size()});
  kernels::ops().pairwise_sqdist(
      p.points.data(), static_cast<size_t>(p.size()), q.points.data(),
      static_cast<size_t>(q.size()), static_cast<size_t>(p.dim()), out.data());
  require_finite(out, "cost_matrix");
  return out;
}

TransportState make_transport_state(Tensor cost, double eps, int iterations) {
  if (cost.rank() != 2) throw ShapeError("transport: cost must be n x m");
  if (!(eps > 0.0)) throw NumericError("transport: eps must be positive");
  if (iterations < 1) throw ConfigError("transport: iteration budget >= 1");
  TransportState st;
  st.cost = std::move(cost);
  st.eps = eps;
  st.iterations = iterations;
  st.log_kernel = scaled(st.cost, -1.0 / eps);
  st.log_a = Tensor({st.cost.dim(0)});
  st.log_b = Tensor({st.cost.dim(1)});  // b0 = 1_m
  return st;
}

TransportState sinkhorn_iterate(TransportState st, bool record_history) {
  const int64_t n = st.cost.dim(0), m = st.cost.dim(1);
  std::vector<double> row(static_cast<size_t>(m)), col(static_cast<size_t>(n));
  if (record_history) {
    st.log_a_hist.clear();
    st.log_b_hist.clear();
    st.log_b_hist.push_back(st.log_b);  // b0 = 1_m
  }
  // The run ends on an a-update so that after it the plan's row sums are
  // exactly 1: a-updates happen L times, b-updates L-1 times.
  for (int l = 1; l <= st.iterations; ++l) {
    // a <- 1/(K b):   log_a_i = -lse_j(log_K_ij + log_b_j)
    for (int64_t i = 0; i < n; ++i) {
      const double* lk = st.log_kernel.data() + i * m;
      for (int64_t j = 0; j < m; ++j)
        row[static_cast<size_t>(j)] = lk[j] + st.log_b[j];
      st.log_a[i] = -logsumexp(std::span<const double>(row));
    }
    if (record_history) st.log_a_hist.push_back(st.log_a);
    if (l == st.iterations) break;
    // b <- 1/(K^T a): log_b_j = -lse_i(log_K_ij + log_a_i)
    for (int64_t j = 0; j < m; ++j) {
      for (int64_t i = 0; i < n; ++i)
        col[static_cast<size_t>(i)] = st.log_kernel.at(i, j) + st.log_a[i];
      st.log_b[j] = -logsumexp(std::span<const double>(col));
    }
    if (record_history) st.log_b_hist.push_back(st.log_b);
  }
  require_finite(st.log_a, "sinkhorn potentials (cost/eps scale mismatch?)");
  require_finite(st.log_b, "sinkhorn potentials (cost/eps scale mismatch?)");
  st.ran = true;
  return st;
}

Tensor transport_plan(const TransportState& st) {
  if (!st.ran) throw ConfigError("transport_plan: state has not run");
  const int64_t n = st.cost.dim(0), m = st.cost.dim(1);
  Tensor p({n, m});
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < m; ++j)
      p.at(i, j) = std::exp(st.log_a[i] + st.log_kernel.at(i, j) + st.log_b[j]);
  require_finite(p, "transport_plan");
  return p;
}

double normalized_plan_cost(const TransportState& st) {
  if (!st.ran) throw ConfigError("normalized_plan_cost: state has not run");
  const int64_t n = st.cost.dim(0), m = st.cost.dim(1);
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < m; ++j)
      acc += std::exp(st.log_a[i] + st.log_kernel.at(i, j) + st.log_b[j]) *
             st.cost.at(i, j);
  return acc / (static_cast<double>(n) * static_cast<double>(m));
}

namespace {

double ot_one_sided(Tensor cost, double eps, int iterations) {
  TransportState st =
      sinkhorn_iterate(make_transport_state(std::move(cost), eps, iterations));
  return normalized_plan_cost(st);
}

}  // namespace

double regularized_ot(const Measure& p, const Measure& q, double eps,
                      int iterations) {
  // At a finite budget the one-sided run is not symmetric in its arguments
  // (the final a-update favors the row marginal), so both orientations are
  // averaged; W(P,Q) == W(Q,P) then holds exactly, and the limit for large L
  // is unchanged.  A self term has a symmetric cost matrix, for which both
  // orientations coincide.
  if (&p == &q) return ot_one_sided(cost_matrix(p, q), eps, iterations);
  double v1 = ot_one_sided(cost_matrix(p, q), eps, iterations);
  double v2 = ot_one_sided(cost_matrix(q, p), eps, iterations);
  return 0.5 * (v1 + v2);
}

double sinkhorn_divergence(const Measure& p, const Measure& q, double eps,
                           int iterations) {
  double cross = regularized_ot(p, q, eps, iterations);
  double self_p = regularized_ot(p, p, eps, iterations);
  double self_q = regularized_ot(q, q, eps, iterations);
  return 2.0 * cross - self_p - self_q;
}

namespace {

// Value of one W term and its gradient w.r.t. the cost matrix, obtained by
// reverse-mode through the recorded iterates (eps held constant).
struct OtBackward {
  double value = 0.0;
  Tensor dcost;
};

OtBackward ot_value_cost_grad(Tensor cost, double eps, int iterations) {
  TransportState st = sinkhorn_iterate(
      make_transport_state(std::move(cost), eps, iterations), true);
  const int64_t n = st.cost.dim(0), m = st.cost.dim(1);
  const double nm = static_cast<double>(n) * static_cast<double>(m);
  const int L = st.iterations;
  // History layout: log_a_hist[l-1] = alpha^l (l = 1..L),
  //                 log_b_hist[l]   = beta^l  (l = 0..L-1).

  OtBackward out;
  out.dcost = Tensor({n, m});
  Tensor dlogk({n, m});
  std::vector<double> abar(static_cast<size_t>(n), 0.0);
  std::vector<double> bbar(static_cast<size_t>(m), 0.0);

  // Seed from V = (1/nm) sum_ij exp(alpha^L_i + lk_ij + beta^{L-1}_j) c_ij.
  const Tensor& alpha_last = st.log_a_hist[static_cast<size_t>(L - 1)];
  const Tensor& beta_last = st.log_b_hist[static_cast<size_t>(L - 1)];
  double value = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < m; ++j) {
      double pij =
          std::exp(alpha_last[i] + st.log_kernel.at(i, j) + beta_last[j]);
      double cij = st.cost.at(i, j);
      value += pij * cij;
      out.dcost.at(i, j) = pij / nm;  // direct cost factor
      double w = pij * cij / nm;
      dlogk.at(i, j) = w;
      abar[static_cast<size_t>(i)] += w;
      bbar[static_cast<size_t>(j)] += w;
    }
  }
  out.value = value / nm;

  // Walk the updates backwards.  alpha^l feeds only the level-l b-update
  // (and the value at l = L); beta^l feeds only the level l+1 a-update (and
  // the value at l = L-1), so each adjoint is complete when consumed.
  for (int l = L; l >= 1; --l) {
    const Tensor& al = st.log_a_hist[static_cast<size_t>(l - 1)];
    const Tensor& blm1 = st.log_b_hist[static_cast<size_t>(l - 1)];
    // a-update backward: alpha^l_i = -lse_j(lk_ij + beta^{l-1}_j),
    // softmax tau_ij = exp(lk_ij + beta^{l-1}_j + alpha^l_i).
    for (int64_t i = 0; i < n; ++i) {
      double tbar = -abar[static_cast<size_t>(i)];
      if (tbar == 0.0) continue;
      for (int64_t j = 0; j < m; ++j) {
        double tau = std::exp(st.log_kernel.at(i, j) + blm1[j] + al[i]);
        dlogk.at(i, j) += tbar * tau;
        bbar[static_cast<size_t>(j)] += tbar * tau;
      }
    }
    std::fill(abar.begin(), abar.end(), 0.0);
    if (l == 1) break;  // beta^0 is constant
    // b-update backward for level l-1: beta^{l-1}_j = -lse_i(lk + alpha^{l-1}),
    // softmax sigma_ij = exp(lk_ij + alpha^{l-1}_i + beta^{l-1}_j).
    const Tensor& alm1 = st.log_a_hist[static_cast<size_t>(l - 2)];
    for (int64_t j = 0; j < m; ++j) {
      double ubar = -bbar[static_cast<size_t>(j)];
      if (ubar == 0.0) continue;
      for (int64_t i = 0; i < n; ++i) {
        double sig = std::exp(st.log_kernel.at(i, j) + alm1[i] + blm1[j]);
        dlogk.at(i, j) += ubar * sig;
        abar[static_cast<size_t>(i)] += ubar * sig;
      }
    }
    std::fill(bbar.begin(), bbar.end(), 0.0);
  }

  // d log_k / d cost = -1/eps.
  add_scaled(out.dcost, -1.0 / eps, dlogk);
  require_finite(out.dcost, "sinkhorn gradient");
  return out;
}

// Maps a cross-term cost gradient onto point gradients:
//   c_ij = sum_t (p_it - q_jt)^2.
void accumulate_point_grads(const Measure& p, const Measure& q,
                            const Tensor& dcost, double weight, Tensor& gp,
                            Tensor& gq) {
  const int64_t n = p.size(), m = q.size(), d = p.dim();
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < m; ++j) {
      double w = weight * dcost.at(i, j);
      if (w == 0.0) continue;
      for (int64_t t = 0; t < d; ++t) {
        double diff = 2.0 * (p.points.at(i, t) - q.points.at(j, t));
        gp.at(i, t) += w * diff;
        gq.at(j, t) -= w * diff;
      }
    }
  }
}

// Self term W(P,P): both cost slots are the same points.
void accumulate_self_grads(const Measure& p, const Tensor& dcost,
                           double weight, Tensor& gp) {
  const int64_t n = p.size(), d = p.dim();
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < n; ++j) {
      double w = weight * (dcost.at(i, j) + dcost.at(j, i));
      if (w == 0.0) continue;
      for (int64_t t = 0; t < d; ++t)
        gp.at(i, t) += w * 2.0 * (p.points.at(i, t) - p.points.at(j, t));
    }
  }
}

}  // namespace

DivergenceGrad sinkhorn_divergence_grad(const Measure& p, const Measure& q,
                                        double eps, int iterations) {
  // Both cross orientations, matching regularized_ot's symmetrization:
  // 2 * W(P,Q) = 2 * (V_pq + V_qp)/2, so each orientation enters at weight 1.
  OtBackward cross_pq = ot_value_cost_grad(cost_matrix(p, q), eps, iterations);
  OtBackward cross_qp = ot_value_cost_grad(cost_matrix(q, p), eps, iterations);
  OtBackward self_p = ot_value_cost_grad(cost_matrix(p, p), eps, iterations);
  OtBackward self_q = ot_value_cost_grad(cost_matrix(q, q), eps, iterations);

  DivergenceGrad g;
  g.value = cross_pq.value + cross_qp.value - self_p.value - self_q.value;
  g.grad_p = Tensor({p.size(), p.dim()});
  g.grad_q = Tensor({q.size(), q.dim()});
  accumulate_point_grads(p, q, cross_pq.dcost, 1.0, g.grad_p, g.grad_q);
  accumulate_point_grads(q, p, cross_qp.dcost, 1.0, g.grad_q, g.grad_p);
  accumulate_self_grads(p, self_p.dcost, -1.0, g.grad_p);
  accumulate_self_grads(q, self_q.dcost, -1.0, g.grad_q);
  require_finite(g.grad_p, "sinkhorn_divergence_grad");
  require_finite(g.grad_q, "sinkhorn_divergence_grad");
  return g;
}

double eps_estimate_batch(const Measure& source, const Measure& target,
                          bool squared) {
  Tensor c = cost_matrix(source, target);
  if (squared) return mean(c);
  double acc = 0.0;
  for (double v : c.values()) acc += std::sqrt(v);
  return acc / static_cast<double>(c.numel());
}

EpsState eps_update(EpsState st, double estimate) {
  if (!std::isfinite(estimate) || estimate < 0.0)
    throw NumericError("eps_update: bad estimate");
  st.updates += 1;
  st.running_mean_cost +=
      (estimate - st.running_mean_cost) / static_cast<double>(st.updates);
  double floored = std::max(estimate, 1e-6 * st.running_mean_cost);
  if (!(floored > 0.0))
    throw NumericError("eps_update: estimate degenerate (zero-cost batch)");
  if (!st.initialized) {
    st.eps = floored;
    st.initialized = true;
  } else {
    st.eps = st.momentum * st.eps + (1.0 - st.momentum) * floored;
  }
  return st;
}

double exact_ot_bruteforce(const Measure& p, const Measure& q) {
  const int64_t n = p.size();
  if (q.size() != n) throw ShapeError("exact_ot_bruteforce: needs n = m");
  if (n > 8) throw ConfigError("exact_ot_bruteforce: n > 8");
  Tensor c = cost_matrix(p, q);
  std::vector<int64_t> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double acc = 0.0;
    for (int64_t i = 0; i < n; ++i)
      acc += c.at(i, perm[static_cast<size_t>(i)]);
    best = std::min(best, acc);
  } while (std::next_permutation(perm.begin(), perm.end()));
  // The unregularized optimum over 1-marginals is a permutation with unit
  // mass per row; dividing by nm matches regularized_ot's normalization.
  return best / (static_cast<double>(n) * static_cast<double>(n));
}

}  // namespace stylematch::sinkhorn
