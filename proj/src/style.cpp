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

#include "stylematch/style.hpp"

#include <cmath>
#include <string>

namespace stylematch::style {

namespace {
constexpr double kVarianceStabilizer = 1e-5;
}

StyleStats style_stats(const Tensor& map, int layer) {
  if (map.rank() != 3) throw ShapeError("style_stats: map must be C x H x W");
  const int64_t c = map.dim(0), hw = map.dim(1) * map.dim(2);
  if (hw < 1) throw ShapeError("style_stats: empty spatial extent");
  StyleStats st;
  st.layer = layer;
  st.mu = Tensor({c});
  st.sigma = Tensor({c});
  const double inv = 1.0 / static_cast<double>(hw);
  for (int64_t ci = 0; ci < c; ++ci) {
    const double* plane = map.data() + ci * hw;
    double mean = 0.0;
    for (int64_t i = 0; i < hw; ++i) mean += plane[i];
    mean *= inv;
    double var = 0.0;
    for (int64_t i = 0; i < hw; ++i) {
      double d = plane[i] - mean;
      var += d * d;
    }
    var *= inv;
    st.mu[ci] = mean;
    st.sigma[ci] = std::sqrt(var + kVarianceStabilizer);
  }
  return st;
}

Tensor style_stats_backward(const Tensor& map, const StyleStats& stats,
                            const Tensor& d_mu, const Tensor& d_sigma) {
  const int64_t c = map.dim(0), hw = map.dim(1) * map.dim(2);
  const double inv = 1.0 / static_cast<double>(hw);
  Tensor dmap(map.shape());
  for (int64_t ci = 0; ci < c; ++ci) {
    const double* plane = map.data() + ci * hw;
    double* dplane = dmap.data() + ci * hw;
    // d sigma_c / d x = (x - mu_c) / (HW * sigma_c); the mu-dependence of the
    // centered sum cancels.
    const double dmu = d_mu[ci] * inv;
    const double dsig = d_sigma[ci] * inv / stats.sigma[ci];
    const double mu = stats.mu[ci];
    for (int64_t i = 0; i < hw; ++i)
      dplane[i] = dmu + dsig * (plane[i] - mu);
  }
  return dmap;
}

std::pair<sinkhorn::Measure, sinkhorn::Measure> style_measures(
    const std::vector<Tensor>& batch_maps, int layer) {
  const int64_t n = static_cast<int64_t>(batch_maps.size());
  if (n < 2)
    throw ShapeError("style_measures: need at least two images per batch");
  const int64_t c = batch_maps.front().dim(0);
  Tensor mu_pts({n, c}), sigma_pts({n, c});
  for (int64_t i = 0; i < n; ++i) {
    const Tensor& map = batch_maps[static_cast<size_t>(i)];
    if (map.dim(0) != c)
      throw ShapeError("style_measures: inconsistent channel count");
    StyleStats st = style_stats(map, layer);
    for (int64_t ci = 0; ci < c; ++ci) {
      mu_pts.at(i, ci) = st.mu[ci];
      sigma_pts.at(i, ci) = st.sigma[ci];
    }
  }
  return {sinkhorn::Measure(mu_pts), sinkhorn::Measure(sigma_pts)};
}

StyleEps make_style_eps(size_t layer_count, double momentum) {
  StyleEps eps;
  eps.mu.resize(layer_count);
  eps.sigma.resize(layer_count);
  for (auto& s : eps.mu) s.momentum = momentum;
  for (auto& s : eps.sigma) s.momentum = momentum;
  return eps;
}

namespace {

void check_taps(const BatchTaps& source, const BatchTaps& target,
                const LayerTapSet& taps) {
  if (source.size() < taps.count() || target.size() < taps.count())
    throw ShapeError("style loss: fewer batch tap layers than the tap set");
  for (size_t l = 0; l < taps.count(); ++l)
    if (source[l].empty() || target[l].empty())
      throw ShapeError("style loss: empty batch on tapped layer " +
                       std::to_string(taps.layers[l]));
}

}  // namespace

void update_style_eps(const BatchTaps& source, const BatchTaps& target,
                      const LayerTapSet& taps, StyleEps& eps,
                      bool squared_estimate) {
  check_taps(source, target, taps);
  if (eps.mu.size() < taps.count() || eps.sigma.size() < taps.count())
    throw ConfigError("update_style_eps: eps state count mismatch");
  for (size_t l = 0; l < taps.count(); ++l) {
    auto [src_mu, src_sigma] = style_measures(source[l], taps.layers[l]);
    auto [tgt_mu, tgt_sigma] = style_measures(target[l], taps.layers[l]);
    eps.mu[l] = sinkhorn::eps_update(
        eps.mu[l],
        sinkhorn::eps_estimate_batch(src_mu, tgt_mu, squared_estimate));
    eps.sigma[l] = sinkhorn::eps_update(
        eps.sigma[l],
        sinkhorn::eps_estimate_batch(src_sigma, tgt_sigma, squared_estimate));
  }
}

StyleLossBreakdown style_matching_loss(const BatchTaps& source,
                                       const BatchTaps& target,
                                       const LayerTapSet& taps,
                                       const StyleEps& eps, int budget) {
  check_taps(source, target, taps);
  StyleLossBreakdown out;
  for (size_t l = 0; l < taps.count(); ++l) {
    auto [src_mu, src_sigma] = style_measures(source[l], taps.layers[l]);
    auto [tgt_mu, tgt_sigma] = style_measures(target[l], taps.layers[l]);
    if (!eps.mu[l].initialized || !eps.sigma[l].initialized)
      throw ConfigError("style_matching_loss: eps not initialized");
    double mu_term =
        sinkhorn::sinkhorn_divergence(src_mu, tgt_mu, eps.mu[l].eps, budget);
    double sigma_term = sinkhorn::sinkhorn_divergence(
        src_sigma, tgt_sigma, eps.sigma[l].eps, budget);
    out.mu_term.push_back(mu_term);
    out.sigma_term.push_back(sigma_term);
    out.mu_eps.push_back(eps.mu[l].eps);
    out.sigma_eps.push_back(eps.sigma[l].eps);
    out.total += mu_term + sigma_term;
  }
  return out;
}

StyleLossBreakdown style_matching_loss_update(const BatchTaps& source,
                                              const BatchTaps& target,
                                              const LayerTapSet& taps,
                                              StyleEps& eps, int budget,
                                              bool squared_estimate) {
  update_style_eps(source, target, taps, eps, squared_estimate);
  return style_matching_loss(source, target, taps, eps, budget);
}

StyleLossGrads style_matching_loss_grad(const BatchTaps& source,
                                        const BatchTaps& target,
                                        const LayerTapSet& taps,
                                        const StyleEps& eps, int budget) {
  check_taps(source, target, taps);
  StyleLossGrads out;
  out.d_source.resize(taps.count());
  out.d_target.resize(taps.count());
  for (size_t l = 0; l < taps.count(); ++l) {
    auto [src_mu, src_sigma] = style_measures(source[l], taps.layers[l]);
    auto [tgt_mu, tgt_sigma] = style_measures(target[l], taps.layers[l]);
    if (!eps.mu[l].initialized || !eps.sigma[l].initialized)
      throw ConfigError("style_matching_loss_grad: eps not initialized");
    sinkhorn::DivergenceGrad gmu = sinkhorn::sinkhorn_divergence_grad(
        src_mu, tgt_mu, eps.mu[l].eps, budget);
    sinkhorn::DivergenceGrad gsigma = sinkhorn::sinkhorn_divergence_grad(
        src_sigma, tgt_sigma, eps.sigma[l].eps, budget);

    out.loss.mu_term.push_back(gmu.value);
    out.loss.sigma_term.push_back(gsigma.value);
    out.loss.mu_eps.push_back(eps.mu[l].eps);
    out.loss.sigma_eps.push_back(eps.sigma[l].eps);
    out.loss.total += gmu.value + gsigma.value;

    const int64_t c = taps.channels[l];
    auto map_back = [&](const std::vector<Tensor>& maps, const Tensor& dmu_pts,
                        const Tensor& dsigma_pts) {
      std::vector<Tensor> dmaps;
      for (size_t i = 0; i < maps.size(); ++i) {
        StyleStats st = style_stats(maps[i], taps.layers[l]);
        Tensor dmu({c}), dsigma({c});
        for (int64_t ci = 0; ci < c; ++ci) {
          dmu[ci] = dmu_pts.at(static_cast<int64_t>(i), ci);
          dsigma[ci] = dsigma_pts.at(static_cast<int64_t>(i), ci);
        }
        dmaps.push_back(style_stats_backward(maps[i], st, dmu, dsigma));
      }
      return dmaps;
    };
    out.d_source[l] = map_back(source[l], gmu.grad_p, gsigma.grad_p);
    out.d_target[l] = map_back(target[l], gmu.grad_q, gsigma.grad_q);
  }
  return out;
}

double mmd_loss(const sinkhorn::Measure& p, const sinkhorn::Measure& q,
                const std::vector<double>& bandwidths) {
  return mmd_loss_grad(p, q, bandwidths).value;
}

namespace {

// Fixed cross-sum iteration order regardless of argument position, so that
// mmd(P,Q) equals mmd(Q,P) bit for bit.
bool canonical_first(const sinkhorn::Measure& p, const sinkhorn::Measure& q) {
  if (p.size() != q.size()) return p.size() < q.size();
  auto a = p.points.values();
  auto b = q.points.values();
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return a[i] < b[i];
  return true;
}

}  // namespace

MmdGrad mmd_loss_grad(const sinkhorn::Measure& p, const sinkhorn::Measure& q,
                      const std::vector<double>& bandwidths) {
  if (bandwidths.empty()) throw ConfigError("mmd_loss: empty bandwidth list");
  for (double bw : bandwidths)
    if (!(bw > 0.0)) throw ConfigError("mmd_loss: bandwidths must be positive");
  if (p.dim() != q.dim()) throw ShapeError("mmd_loss: dimension mismatch");
  const int64_t n = p.size(), m = q.size(), d = p.dim();
  const bool p_outer = canonical_first(p, q);

  MmdGrad out;
  out.grad_p = Tensor({n, d});
  out.grad_q = Tensor({m, d});
  Tensor cpp = cost_matrix(p, p);
  Tensor cqq = cost_matrix(q, q);
  Tensor cpq = cost_matrix(p, q);

  for (double bw : bandwidths) {
    const double inv_bw2 = 1.0 / (bw * bw);
    double term_pp = 0.0, term_qq = 0.0, term_pq = 0.0;
    // k(x,y) = exp(-|x-y|^2 / bw^2); dk/dx = -2 (x-y)/bw^2 * k
    for (int64_t i = 0; i < n; ++i)
      for (int64_t j = 0; j < n; ++j) {
        double kv = std::exp(-cpp.at(i, j) * inv_bw2);
        term_pp += kv;
        double w = (2.0 / static_cast<double>(n * n)) * kv * (-2.0) * inv_bw2;
        if (i != j)
          for (int64_t t = 0; t < d; ++t)
            out.grad_p.at(i, t) +=
                w * (p.points.at(i, t) - p.points.at(j, t));
      }
    for (int64_t i = 0; i < m; ++i)
      for (int64_t j = 0; j < m; ++j) {
        double kv = std::exp(-cqq.at(i, j) * inv_bw2);
        term_qq += kv;
        double w = (2.0 / static_cast<double>(m * m)) * kv * (-2.0) * inv_bw2;
        if (i != j)
          for (int64_t t = 0; t < d; ++t)
            out.grad_q.at(i, t) +=
                w * (q.points.at(i, t) - q.points.at(j, t));
      }
    auto cross = [&](int64_t i, int64_t j) {
      double kv = std::exp(-cpq.at(i, j) * inv_bw2);
      term_pq += kv;
      double w = (-2.0 / static_cast<double>(n * m)) * kv * (-2.0) * inv_bw2;
      for (int64_t t = 0; t < d; ++t) {
        double diff = p.points.at(i, t) - q.points.at(j, t);
        out.grad_p.at(i, t) += w * diff;
        out.grad_q.at(j, t) -= w * diff;
      }
    };
    if (p_outer) {
      for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < m; ++j) cross(i, j);
    } else {
      for (int64_t j = 0; j < m; ++j)
        for (int64_t i = 0; i < n; ++i) cross(i, j);
    }
    out.value += term_pp / static_cast<double>(n * n) +
                 term_qq / static_cast<double>(m * m) -
                 2.0 * term_pq / static_cast<double>(n * m);
  }
  require_finite(out.grad_p, "mmd_loss_grad");
  require_finite(out.grad_q, "mmd_loss_grad");
  return out;
}

std::vector<double> default_bandwidths(const sinkhorn::Measure& p,
                                       const sinkhorn::Measure& q) {
  double mc = sinkhorn::eps_estimate_batch(p, q, true);
  if (!(mc > 0.0)) mc = 1.0;  // degenerate identical batches
  return {0.5 * mc, mc, 2.0 * mc};
}

}  // namespace stylematch::style
