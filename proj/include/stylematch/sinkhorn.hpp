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

#pragma once

#include <cstdint>
#include <vector>

#include "stylematch/tensor.hpp"

namespace stylematch::sinkhorn {

/// Empirical distribution: n uniform-weight points in R^d.
struct Measure {
  Tensor points;  // n x d

  Measure() = default;
  explicit Measure(Tensor pts);
  int64_t size() const { return points.dim(0); }
  int64_t dim() const { return points.dim(1); }
};

/// Squared Euclidean pairwise costs (distance exponent p = 2).
Tensor cost_matrix(const Measure& p, const Measure& q);

/// Scaling-form transport problem between 1_n and 1_m marginals.
/// Potentials are kept in the log domain: a = exp(log_a), b = exp(log_b).
struct TransportState {
  Tensor cost;   // n x m, entries >= 0
  double eps = 0.0;
  Tensor log_kernel;  // -cost/eps
  Tensor log_a, log_b;
  int iterations = 0;
  bool ran = false;
  // Per-iterate potentials when recorded (needed to differentiate through
  // the unrolled updates): log_a_hist[l], log_b_hist[l] for l = 1..L and
  // log_b_hist[0] = 0.
  std::vector<Tensor> log_a_hist, log_b_hist;
};

TransportState make_transport_state(Tensor cost, double eps, int iterations);

/// Runs the alternating updates a <- 1/(K b), b <- 1/(K^T a) from b0 = 1_m
/// via logsumexp.  The run ends on an a-update (a-updates L times, b-updates
/// L-1 times), so afterwards the plan's row sums are 1 exactly up to
/// roundoff while column sums converge with the budget.
TransportState sinkhorn_iterate(TransportState state,
                                bool record_history = false);

/// P_ij = a_i K_ij b_j of a state that has run.
Tensor transport_plan(const TransportState& state);

/// (1/(nm)) * a^T (K (.) cost) b of a state that has run.
double normalized_plan_cost(const TransportState& state);

/// W_eps(P, Q): normalized entropy-regularized transport cost, averaged
/// over both argument orientations so W(P,Q) == W(Q,P) exactly at any
/// budget.
double regularized_ot(const Measure& p, const Measure& q, double eps,
                      int iterations);

/// Debiased divergence 2 W(P,Q) - W(P,P) - W(Q,Q).
double sinkhorn_divergence(const Measure& p, const Measure& q, double eps,
                           int iterations);

struct DivergenceGrad {
  double value = 0.0;
  Tensor grad_p;  // d value / d p.points, n x d
  Tensor grad_q;  // d value / d q.points, m x d
};

/// Reverse-mode gradient through the L unrolled iterations of all three
/// terms; eps is treated as a constant.
DivergenceGrad sinkhorn_divergence_grad(const Measure& p, const Measure& q,
                                        double eps, int iterations);

/// Mean pairwise batch cost; squared Euclidean by default, plain Euclidean
/// when squared = false (the paper's phrasing is ambiguous, see config).
double eps_estimate_batch(const Measure& source, const Measure& target,
                          bool squared = true);

/// Momentum-tracked regularizer.  First update adopts the (floored)
/// estimate, later ones blend eps <- rho*eps + (1-rho)*estimate.
struct EpsState {
  double eps = 0.0;
  double momentum = 0.9;
  bool initialized = false;
  double running_mean_cost = 0.0;
  int64_t updates = 0;
};

EpsState eps_update(EpsState state, double estimate);

/// Minimum assignment cost over all n! pairings, scaled by 1/(nm) to match
/// regularized_ot.  Requires n = m <= 8.
double exact_ot_bruteforce(const Measure& p, const Measure& q);

}  // namespace stylematch::sinkhorn
