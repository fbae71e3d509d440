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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "stylematch/rng.hpp"
#include "stylematch/sinkhorn.hpp"

using namespace stylematch;
using namespace stylematch::sinkhorn;

namespace {

Measure random_measure(Rng& rng, int64_t n, int64_t d, double lo = -1.0,
                       double hi = 1.0) {
  Tensor pts({n, d});
  for (auto& v : pts.values()) v = rng.uniform(lo, hi);
  return Measure(pts);
}

// Independent permutation-enumeration oracle (does not call the library's
// bruteforce): min assignment cost / (n*m).
double assignment_oracle(const Measure& p, const Measure& q) {
  const int64_t n = p.size();
  std::vector<int64_t> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  double best = 1e300;
  do {
    double acc = 0.0;
    for (int64_t i = 0; i < n; ++i) {
      double c = 0.0;
      for (int64_t t = 0; t < p.dim(); ++t) {
        double diff =
            p.points.at(i, t) - q.points.at(perm[static_cast<size_t>(i)], t);
        c += diff * diff;
      }
      acc += c;
    }
    best = std::min(best, acc);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(n * n);
}

double mean_cost(const Measure& p, const Measure& q) {
  Tensor c = cost_matrix(p, q);
  double acc = 0.0;
  for (double v : c.values()) acc += v;
  return acc / static_cast<double>(c.numel());
}

}  // namespace

TEST_CASE("cost_matrix: trivial cases and pairwise-loop oracle") {
  Measure a(Tensor::from_values({1, 1}, {0.5}));
  Measure b(Tensor::from_values({1, 1}, {0.5}));
  CHECK(cost_matrix(a, b).at(0, 0) == 0.0);

  Measure p0(Tensor::from_values({1, 1}, {0.0}));
  Measure p3(Tensor::from_values({1, 1}, {3.0}));
  CHECK(cost_matrix(p0, p3).at(0, 0) == 9.0);

  Rng rng(31);
  Measure p = random_measure(rng, 4, 3);
  Measure q = random_measure(rng, 5, 3);
  Tensor c = cost_matrix(p, q);
  for (int64_t i = 0; i < 4; ++i)
    for (int64_t j = 0; j < 5; ++j) {
      double want = 0.0;
      for (int64_t t = 0; t < 3; ++t) {
        double diff = p.points.at(i, t) - q.points.at(j, t);
        want += diff * diff;
      }
      CHECK(c.at(i, j) == doctest::Approx(want).epsilon(1e-14));
    }

  Measure qd = random_measure(rng, 5, 2);
  CHECK_THROWS_AS(cost_matrix(p, qd), ShapeError);
}

TEST_CASE("sinkhorn_iterate: forced 1x1 plan and 2x2 symmetry") {
  Tensor c1 = Tensor::from_values({1, 1}, {4.0});
  auto st = sinkhorn_iterate(make_transport_state(c1, 1.0, 10));
  Tensor plan = transport_plan(st);
  CHECK(plan.at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));

  Tensor c2 = Tensor::from_values({2, 2}, {0.0, 1.7, 1.7, 0.0});
  auto st2 = sinkhorn_iterate(make_transport_state(c2, 0.5, 7));
  CHECK(st2.log_a[0] == doctest::Approx(st2.log_a[1]).epsilon(1e-14));
  CHECK(st2.log_b[0] == doctest::Approx(st2.log_b[1]).epsilon(1e-14));

  CHECK_THROWS_AS(make_transport_state(c2, 0.0, 10), NumericError);
  CHECK_THROWS_AS(make_transport_state(c2, -1.0, 10), NumericError);
}

TEST_CASE("log-domain equals direct scaling-form arithmetic at eps = 1") {
  Rng rng(32);
  Tensor cost({5, 5});
  for (auto& v : cost.values()) v = rng.uniform(0.0, 3.0);

  const int L = 10;
  auto st = sinkhorn_iterate(make_transport_state(cost, 1.0, L));

  // direct scaling form, no logs; mirrors the a-update-last schedule
  std::vector<double> a(5, 0.0), b(5, 1.0);
  for (int l = 1; l <= L; ++l) {
    for (int i = 0; i < 5; ++i) {
      double kb = 0.0;
      for (int j = 0; j < 5; ++j) kb += std::exp(-cost.at(i, j)) * b[j];
      a[i] = 1.0 / kb;
    }
    if (l == L) break;
    for (int j = 0; j < 5; ++j) {
      double ka = 0.0;
      for (int i = 0; i < 5; ++i) ka += std::exp(-cost.at(i, j)) * a[i];
      b[j] = 1.0 / ka;
    }
  }
  for (int i = 0; i < 5; ++i)
    CHECK(std::exp(st.log_a[i]) == doctest::Approx(a[i]).epsilon(1e-10));
  for (int j = 0; j < 5; ++j)
    CHECK(std::exp(st.log_b[j]) == doctest::Approx(b[j]).epsilon(1e-10));
}

TEST_CASE("plan marginals: rows exact after final a-update, columns improve") {
  Rng rng(33);
  Measure p = random_measure(rng, 6, 3);
  Measure q = random_measure(rng, 7, 3);
  Tensor cost = cost_matrix(p, q);
  double eps = 0.3 * mean_cost(p, q);

  double prev_col_residual = 1e300;
  for (int L : {1, 2, 4, 8, 16, 32}) {
    auto st = sinkhorn_iterate(make_transport_state(cost, eps, L));
    Tensor plan = transport_plan(st);
    for (int64_t i = 0; i < 6; ++i) {
      double row = 0.0;
      for (int64_t j = 0; j < 7; ++j) row += plan.at(i, j);
      CHECK(std::abs(row - 1.0) <= 1e-9);
    }
    double col_residual = 0.0;
    for (int64_t j = 0; j < 7; ++j) {
      double col = 0.0;
      for (int64_t i = 0; i < 6; ++i) col += plan.at(i, j);
      col_residual = std::max(col_residual, std::abs(col - 1.0));
    }
    CHECK(col_residual <= prev_col_residual + 1e-12);
    prev_col_residual = col_residual;
  }
}

TEST_CASE("regularized_ot: forced plans and permutation-enumeration oracle") {
  Measure single(Tensor::from_values({1, 2}, {0.3, -0.7}));
  CHECK(regularized_ot(single, single, 1.0, 10) ==
        doctest::Approx(0.0).epsilon(1e-12));

  Measure x(Tensor::from_values({1, 1}, {0.0}));
  Measure y(Tensor::from_values({1, 1}, {3.0}));
  CHECK(regularized_ot(x, y, 1.0, 10) == doctest::Approx(9.0).epsilon(1e-12));

  // eps -> 0 limit at a converged budget (small instances, so still cheap)
  Rng rng(34);
  for (int rep = 0; rep < 20; ++rep) {
    int64_t n = 2 + rng.next_int(4);  // 2..5
    int64_t d = 1 + rng.next_int(4);
    Measure p = random_measure(rng, n, d);
    Measure q = random_measure(rng, n, d);
    double eps = 1e-3 * mean_cost(p, q);
    double got = regularized_ot(p, q, eps, 20000);
    double want = assignment_oracle(p, q);
    CHECK(std::abs(got - want) <= 0.05 * std::max(std::abs(want), 1e-12));
  }
}

TEST_CASE("sinkhorn_divergence: identity, symmetry, separated clouds") {
  Rng rng(35);
  Measure p = random_measure(rng, 8, 3);
  Measure q = random_measure(rng, 9, 3);

  CHECK(std::abs(sinkhorn_divergence(p, p, 0.7, 10)) <= 1e-9);
  double pq = sinkhorn_divergence(p, q, 0.7, 10);
  double qp = sinkhorn_divergence(q, p, 0.7, 10);
  CHECK(std::abs(pq - qp) <= 1e-9);

  // two clouds separated by 10 in the first coordinate
  Tensor a({32, 3}), b({32, 3});
  for (int64_t i = 0; i < 32; ++i)
    for (int64_t t = 0; t < 3; ++t) {
      a.at(i, t) = rng.gaussian();
      b.at(i, t) = rng.gaussian() + (t == 0 ? 10.0 : 0.0);
    }
  Measure pa(a), pb(b);
  double cross = regularized_ot(pa, pb, 1.0, 10);
  double div = sinkhorn_divergence(pa, pb, 1.0, 10);
  CHECK(div > 0.0);
  CHECK(std::abs(div - 2.0 * cross) <= 0.1 * std::abs(2.0 * cross));
}

TEST_CASE("sinkhorn_divergence properties on random instances") {
  Rng rng(36);
  for (int rep = 0; rep < 12; ++rep) {
    int64_t n = 2 + rng.next_int(6);
    int64_t m = 2 + rng.next_int(6);
    int64_t d = 1 + rng.next_int(3);
    Measure p = random_measure(rng, n, d);
    Measure q = random_measure(rng, m, d);
    double eps = 0.5 * mean_cost(p, q);
    double div = sinkhorn_divergence(p, q, eps, 10);
    CHECK(div >= -1e-8);

    // translation covariance of every W value
    Tensor pt = p.points, qt = q.points;
    for (int64_t i = 0; i < n; ++i)
      for (int64_t t = 0; t < d; ++t) pt.at(i, t) += 3.25;
    for (int64_t j = 0; j < m; ++j)
      for (int64_t t = 0; t < d; ++t) qt.at(j, t) += 3.25;
    Measure p2(pt), q2(qt);
    CHECK(std::abs(regularized_ot(p, q, eps, 10) -
                   regularized_ot(p2, q2, eps, 10)) <= 1e-9);
    CHECK(std::abs(regularized_ot(p, p, eps, 10) -
                   regularized_ot(p2, p2, eps, 10)) <= 1e-9);
  }
}

TEST_CASE("sinkhorn_divergence_grad: stationarity, closed form, finite diff") {
  Rng rng(37);
  Measure p = random_measure(rng, 5, 2);
  auto self = sinkhorn_divergence_grad(p, p, 0.6, 10);
  double norm = 0.0;
  for (double v : self.grad_p.values()) norm += v * v;
  CHECK(std::sqrt(norm) < 1e-6);

  // n = m = 1 in R^1: divergence = 2(x-y)^2, d/dx = 4(x-y)
  Measure mx(Tensor::from_values({1, 1}, {1.3}));
  Measure my(Tensor::from_values({1, 1}, {-0.4}));
  auto g1 = sinkhorn_divergence_grad(mx, my, 1.0, 10);
  CHECK(g1.value == doctest::Approx(2.0 * 1.7 * 1.7).epsilon(1e-10));
  CHECK(g1.grad_p.at(0, 0) == doctest::Approx(4.0 * 1.7).epsilon(1e-10));
  CHECK(g1.grad_q.at(0, 0) == doctest::Approx(-4.0 * 1.7).epsilon(1e-10));

  // central finite differences on a random instance, both arguments
  Measure q = random_measure(rng, 4, 2);
  Measure p4 = random_measure(rng, 4, 2);
  double eps = 0.5 * mean_cost(p4, q);
  auto g = sinkhorn_divergence_grad(p4, q, eps, 10);
  const double h = 1e-5;
  for (int64_t i = 0; i < 4; ++i)
    for (int64_t t = 0; t < 2; ++t) {
      Tensor plus = p4.points, minus = p4.points;
      plus.at(i, t) += h;
      minus.at(i, t) -= h;
      double fd = (sinkhorn_divergence(Measure(plus), q, eps, 10) -
                   sinkhorn_divergence(Measure(minus), q, eps, 10)) /
                  (2.0 * h);
      double denom = std::max(std::abs(fd), 1e-8);
      CHECK(std::abs(g.grad_p.at(i, t) - fd) / denom < 1e-4);

      Tensor qplus = q.points, qminus = q.points;
      qplus.at(i, t) += h;
      qminus.at(i, t) -= h;
      double fdq = (sinkhorn_divergence(p4, Measure(qplus), eps, 10) -
                    sinkhorn_divergence(p4, Measure(qminus), eps, 10)) /
                   (2.0 * h);
      double denomq = std::max(std::abs(fdq), 1e-8);
      CHECK(std::abs(g.grad_q.at(i, t) - fdq) / denomq < 1e-4);
    }
}

TEST_CASE("eps_estimate_batch: examples and double-loop oracle") {
  Measure s(Tensor::from_values({1, 1}, {0.0}));
  CHECK(eps_estimate_batch(s, s) == 0.0);

  Measure t(Tensor::from_values({1, 1}, {3.0}));
  CHECK(eps_estimate_batch(s, t) == 9.0);
  CHECK(eps_estimate_batch(s, t, false) == doctest::Approx(3.0));

  Rng rng(38);
  Measure p = random_measure(rng, 6, 4);
  Measure q = random_measure(rng, 5, 4);
  double acc = 0.0;
  for (int64_t i = 0; i < 6; ++i)
    for (int64_t j = 0; j < 5; ++j) {
      double c = 0.0;
      for (int64_t k = 0; k < 4; ++k) {
        double diff = p.points.at(i, k) - q.points.at(j, k);
        c += diff * diff;
      }
      acc += c;
    }
  CHECK(eps_estimate_batch(p, q) ==
        doctest::Approx(acc / 30.0).epsilon(1e-14));
}

TEST_CASE("eps_update: blend arithmetic, fixed point, geometric closed form") {
  EpsState st;
  st.eps = 1.0;
  st.momentum = 0.9;
  st.initialized = true;
  st.running_mean_cost = 1.0;
  st.updates = 1;
  EpsState next = eps_update(st, 2.0);
  CHECK(next.eps == doctest::Approx(1.1).epsilon(1e-15));

  EpsState fixed = eps_update(st, st.eps);
  CHECK(fixed.eps == doctest::Approx(1.0).epsilon(1e-15));

  EpsState run;
  run.eps = 1.0;
  run.momentum = 0.9;
  run.initialized = true;
  run.running_mean_cost = 1.0;
  run.updates = 1;
  double prev = run.eps;
  for (int kk = 1; kk <= 50; ++kk) {
    run = eps_update(run, 5.0);
    double closed = 5.0 - 4.0 * std::pow(0.9, kk);
    CHECK(std::abs(run.eps - closed) <= 1e-12);
    CHECK(run.eps > prev);  // monotone toward 5
    prev = run.eps;
  }

  EpsState fresh;
  CHECK_THROWS_AS(eps_update(fresh, 0.0), NumericError);
  EpsState init = eps_update(fresh, 4.0);
  CHECK(init.initialized);
  CHECK(init.eps == 4.0);
}

TEST_CASE("exact_ot_bruteforce: trivial and independent exhaustive check") {
  Measure a(Tensor::from_values({1, 1}, {1.0}));
  Measure b(Tensor::from_values({1, 1}, {4.0}));
  CHECK(exact_ot_bruteforce(a, b) == 9.0);

  // same two points swapped -> zero cost
  Measure p(Tensor::from_values({2, 1}, {0.0, 1.0}));
  Measure q(Tensor::from_values({2, 1}, {1.0, 0.0}));
  CHECK(exact_ot_bruteforce(p, q) == 0.0);

  Rng rng(39);
  Measure p5 = random_measure(rng, 5, 3);
  Measure q5 = random_measure(rng, 5, 3);
  CHECK(exact_ot_bruteforce(p5, q5) ==
        doctest::Approx(assignment_oracle(p5, q5)).epsilon(1e-12));

  Measure q4 = random_measure(rng, 4, 3);
  CHECK_THROWS_AS(exact_ot_bruteforce(p5, q4), ShapeError);
  Measure p9 = random_measure(rng, 9, 3);
  Measure q9 = random_measure(rng, 9, 3);
  CHECK_THROWS_AS(exact_ot_bruteforce(p9, q9), ConfigError);
}
