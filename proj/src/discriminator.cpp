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

#include "stylematch/discriminator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "stylematch/errors.hpp"

namespace stylematch::disc {

namespace {
constexpr double kNormFloor = 1e-10;
}

Config Config::desk_default(int64_t in_h, int64_t in_w) {
  Config cfg;
  cfg.stack.in_channels = 1;
  cfg.stack.in_h = in_h;
  cfg.stack.in_w = in_w;
  cfg.stack.blocks = {{8, true}, {16, true}, {32, true}, {64, true}};
  return cfg;
}

Params init_params(const Config& cfg, Rng& rng) {
  Params p;
  Rng stack_rng = rng.split(1);
  p.convs = nn::init_conv_stack(cfg.stack, stack_rng);
  for (const nn::BlockSpec& spec : cfg.stack.blocks)
    p.u.push_back(Tensor({spec.out_channels}, 0.1));
  p.v = Tensor({cfg.tap_count()});  // zeros: g == 0.5, neutral
  return p;
}

Tensor unit_normalize(const Tensor& map) {
  if (map.rank() != 3) throw ShapeError("unit_normalize: map must be CxHxW");
  const int64_t c = map.dim(0), hw = map.dim(1) * map.dim(2);
  Tensor out(map.shape());
  for (int64_t s = 0; s < hw; ++s) {
    double n2 = 0.0;
    for (int64_t ci = 0; ci < c; ++ci) {
      double v = map[ci * hw + s];
      n2 += v * v;
    }
    double denom = std::sqrt(n2) + kNormFloor;
    for (int64_t ci = 0; ci < c; ++ci)
      out[ci * hw + s] = map[ci * hw + s] / denom;
  }
  return out;
}

Tensor unit_normalize_backward(const Tensor& map, const Tensor& d_norm) {
  const int64_t c = map.dim(0), hw = map.dim(1) * map.dim(2);
  Tensor dmap(map.shape());
  for (int64_t s = 0; s < hw; ++s) {
    double n2 = 0.0, dot = 0.0;
    for (int64_t ci = 0; ci < c; ++ci) {
      double x = map[ci * hw + s];
      n2 += x * x;
      dot += d_norm[ci * hw + s] * x;
    }
    double norm = std::sqrt(n2);
    double denom = norm + kNormFloor;
    double shrink = norm > 0.0 ? dot / (norm * denom * denom) : 0.0;
    for (int64_t ci = 0; ci < c; ++ci)
      dmap[ci * hw + s] =
          d_norm[ci * hw + s] / denom - shrink * map[ci * hw + s];
  }
  return dmap;
}

double perceptual_scalar(const Tensor& norm_map, const Tensor& u) {
  const int64_t c = norm_map.dim(0), hw = norm_map.dim(1) * norm_map.dim(2);
  if (u.numel() != c)
    throw ShapeError("perceptual_scalar: u length != channel count");
  double acc = 0.0;
  for (int64_t ci = 0; ci < c; ++ci) {
    const double* plane = norm_map.data() + ci * hw;
    double channel = 0.0;
    for (int64_t s = 0; s < hw; ++s) channel += plane[s];
    acc += u[ci] * channel;
  }
  return acc / static_cast<double>(hw);
}

double score(const Tensor& image, const Config& cfg, const Params& params,
             ScoreTrace* trace) {
  ScoreTrace local;
  ScoreTrace& tr = trace ? *trace : local;
  nn::conv_stack_forward(image, cfg.stack, params.convs, &tr.stack);
  const int64_t taps = cfg.tap_count();
  tr.norm.clear();
  tr.r = Tensor({taps});
  for (int64_t l = 0; l < taps; ++l) {
    Tensor norm = unit_normalize(tr.stack.act[static_cast<size_t>(l)]);
    tr.r[l] = perceptual_scalar(norm, params.u[static_cast<size_t>(l)]);
    tr.norm.push_back(std::move(norm));
  }
  double logit = 0.0;
  for (int64_t l = 0; l < taps; ++l) logit += params.v[l] * tr.r[l];
  tr.logit = logit;
  tr.score = 1.0 / (1.0 + std::exp(-logit));
  return tr.score;
}

double domain_loss(double source_score, double target_score) {
  return source_score * source_score +
         (target_score - 1.0) * (target_score - 1.0);
}

double weight_classification(double score, double lc) { return score * lc; }

Grads zero_grads(const Params& params) {
  Grads g;
  g.conv = nn::zero_conv_grads(params.convs);
  for (const Tensor& u : params.u) g.u.emplace_back(u.shape());
  g.v = Tensor(params.v.shape());
  return g;
}

void score_backward(const Config& cfg, const Params& params,
                    const ScoreTrace& trace, double d_score, Grads& grads) {
  const int64_t taps = cfg.tap_count();
  const double d_logit = d_score * trace.score * (1.0 - trace.score);
  std::vector<Tensor> d_act(static_cast<size_t>(taps));
  for (int64_t l = 0; l < taps; ++l) {
    grads.v[l] += d_logit * trace.r[l];
    const double d_r = d_logit * params.v[l];
    const Tensor& norm = trace.norm[static_cast<size_t>(l)];
    const Tensor& u = params.u[static_cast<size_t>(l)];
    const int64_t c = norm.dim(0), hw = norm.dim(1) * norm.dim(2);
    const double inv_hw = 1.0 / static_cast<double>(hw);
    // r = (1/HW) sum_s <u, norm_s>
    Tensor d_norm(norm.shape());
    for (int64_t ci = 0; ci < c; ++ci) {
      const double* plane = norm.data() + ci * hw;
      double channel = 0.0;
      for (int64_t s = 0; s < hw; ++s) channel += plane[s];
      grads.u[static_cast<size_t>(l)][ci] += d_r * inv_hw * channel;
      double g = d_r * inv_hw * u[ci];
      double* dplane = d_norm.data() + ci * hw;
      for (int64_t s = 0; s < hw; ++s) dplane[s] = g;
    }
    d_act[static_cast<size_t>(l)] = unit_normalize_backward(
        trace.stack.act[static_cast<size_t>(l)], d_norm);
  }
  nn::conv_stack_backward(cfg.stack, params.convs, trace.stack, d_act,
                          grads.conv);
}

namespace {

struct Velocity {
  nn::ConvGrads conv;
  std::vector<Tensor> u;
  Tensor v;
};

void apply_sgd(Params& p, const Grads& g, Velocity& vel, double lr,
               double momentum) {
  auto step = [&](Tensor& param, const Tensor& grad, Tensor& v) {
    for (int64_t i = 0; i < param.numel(); ++i) {
      v[i] = momentum * v[i] + grad[i];
      param[i] -= lr * v[i];
    }
  };
  for (size_t li = 0; li < p.convs.size(); ++li) {
    step(p.convs[li].w, g.conv.dw[li], vel.conv.dw[li]);
    step(p.convs[li].b, g.conv.db[li], vel.conv.db[li]);
  }
  for (size_t l = 0; l < p.u.size(); ++l) {
    step(p.u[l], g.u[l], vel.u[l]);
    for (auto& x : p.u[l].values()) x = std::max(x, 0.0);  // u stays >= 0
  }
  step(p.v, g.v, vel.v);
}

}  // namespace

TrainResult train_discriminator(const std::vector<Tensor>& source,
                                const std::vector<Tensor>& target,
                                const Config& cfg, const TrainConfig& tc,
                                Rng& rng) {
  if (source.empty() || target.empty())
    throw ConfigError("train_discriminator: empty image stream");
  TrainResult result;
  Rng init_rng = rng.split(11);
  result.params = init_params(cfg, init_rng);
  Params& params = result.params;

  Velocity vel;
  vel.conv = nn::zero_conv_grads(params.convs);
  for (const Tensor& u : params.u) vel.u.emplace_back(u.shape());
  vel.v = Tensor(params.v.shape());

  const size_t pairs_per_epoch = std::min(source.size(), target.size());
  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    Rng shuffle_rng = rng.split(100 + static_cast<uint64_t>(epoch));
    std::vector<size_t> sidx(source.size()), tidx(target.size());
    std::iota(sidx.begin(), sidx.end(), 0);
    std::iota(tidx.begin(), tidx.end(), 0);
    shuffle_rng.shuffle(sidx);
    shuffle_rng.shuffle(tidx);

    double epoch_loss = 0.0;
    size_t batches = 0;
    for (size_t start = 0; start < pairs_per_epoch;
         start += static_cast<size_t>(tc.batch_pairs)) {
      size_t end =
          std::min(pairs_per_epoch, start + static_cast<size_t>(tc.batch_pairs));
      const double inv_b = 1.0 / static_cast<double>(end - start);
      Grads grads = zero_grads(params);
      double batch_loss = 0.0;
      for (size_t i = start; i < end; ++i) {
        ScoreTrace ts, tt;
        double gs = score(source[sidx[i]], cfg, params, &ts);
        double gt = score(target[tidx[i]], cfg, params, &tt);
        batch_loss += inv_b * domain_loss(gs, gt);
        score_backward(cfg, params, ts, inv_b * 2.0 * gs, grads);
        score_backward(cfg, params, tt, inv_b * 2.0 * (gt - 1.0), grads);
      }
      if (!std::isfinite(batch_loss))
        throw NumericError("train_discriminator: loss diverged at epoch " +
                           std::to_string(epoch) + ", batch " +
                           std::to_string(batches));
      apply_sgd(params, grads, vel, tc.lr, tc.momentum);
      epoch_loss += batch_loss;
      ++batches;
    }
    result.loss_per_epoch.push_back(epoch_loss /
                                    static_cast<double>(std::max<size_t>(1, batches)));
  }
  return result;
}

double auc(const std::vector<double>& source_scores,
           const std::vector<double>& target_scores) {
  if (source_scores.empty() || target_scores.empty())
    throw ConfigError("auc: empty score list");
  struct Entry {
    double s;
    bool target;
  };
  std::vector<Entry> all;
  for (double s : source_scores) all.push_back({s, false});
  for (double s : target_scores) all.push_back({s, true});
  std::sort(all.begin(), all.end(),
            [](const Entry& a, const Entry& b) { return a.s < b.s; });
  // midranks for ties
  double rank_sum_target = 0.0;
  size_t i = 0;
  while (i < all.size()) {
    size_t j = i;
    while (j < all.size() && all[j].s == all[i].s) ++j;
    double midrank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
    for (size_t t = i; t < j; ++t)
      if (all[t].target) rank_sum_target += midrank;
    i = j;
  }
  const double nt = static_cast<double>(target_scores.size());
  const double ns = static_cast<double>(source_scores.size());
  return (rank_sum_target - nt * (nt + 1.0) / 2.0) / (nt * ns);
}

Histogram score_histogram(const std::vector<double>& scores,
                          const std::vector<double>* weights, int bins) {
  if (bins < 2) throw ConfigError("score_histogram: bins >= 2");
  if (weights && weights->size() != scores.size())
    throw ConfigError("score_histogram: weight count mismatch");
  Histogram h;
  h.edges.resize(static_cast<size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b)
    h.edges[static_cast<size_t>(b)] =
        static_cast<double>(b) / static_cast<double>(bins);
  h.mass.assign(static_cast<size_t>(bins), 0.0);
  for (size_t i = 0; i < scores.size(); ++i) {
    double s = scores[i];
    if (s < 0.0 || s > 1.0)
      throw ConfigError("score_histogram: score outside [0,1]");
    // interior boundaries belong to the upper bin
    int64_t bin = static_cast<int64_t>(
        std::floor(s * static_cast<double>(bins)));
    bin = std::min<int64_t>(bin, bins - 1);
    h.mass[static_cast<size_t>(bin)] += weights ? (*weights)[i] : 1.0;
  }
  return h;
}

void export_scores_csv(const std::string& path,
                       const std::vector<std::string>& ids,
                       const std::vector<std::string>& domains,
                       const std::vector<double>& scores) {
  if (ids.size() != scores.size() || domains.size() != scores.size())
    throw ConfigError("export_scores_csv: column length mismatch");
  std::ofstream out(path);
  if (!out) throw IoError("export_scores_csv: cannot open " + path);
  out << "image_id,domain,score\n";
  char buf[64];
  for (size_t i = 0; i < scores.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", scores[i]);
    out << ids[i] << ',' << domains[i] << ',' << buf << '\n';
  }
  if (!out) throw IoError("export_scores_csv: write failed for " + path);
}

}  // namespace stylematch::disc
