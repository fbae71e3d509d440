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

#include "stylematch/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stylematch/kernels.hpp"

namespace stylematch::net {

Mode mode_from_string(const std::string& s) {
  if (s == "baseline") return Mode::Baseline;
  if (s == "ps") return Mode::Ps;
  if (s == "sm") return Mode::Sm;
  if (s == "ps+sm") return Mode::PsSm;
  if (s == "mmd") return Mode::Mmd;
  throw ConfigError("unknown mode: " + s);
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Baseline:
      return "baseline";
    case Mode::Ps:
      return "ps";
    case Mode::Sm:
      return "sm";
    case Mode::PsSm:
      return "ps+sm";
    case Mode::Mmd:
      return "mmd";
  }
  throw ConfigError("bad mode value");
}

BackboneConfig BackboneConfig::desk_default(int64_t num_classes) {
  BackboneConfig cfg;
  cfg.stack.in_channels = 1;
  cfg.stack.in_h = 32;
  cfg.stack.in_w = 32;
  // Tap geometry mirrors the paper's shallow taps: full, half, half,
  // quarter resolution after blocks 1..4.
  cfg.stack.blocks = {{6, false}, {12, true}, {12, false}, {24, true}, {24, true}};
  cfg.embed_dim = 64;
  cfg.num_taps = 4;
  cfg.num_classes = num_classes;
  return cfg;
}

BackboneConfig BackboneConfig::miniature(int64_t num_classes) {
  BackboneConfig cfg;
  cfg.stack.in_channels = 1;
  cfg.stack.in_h = 8;
  cfg.stack.in_w = 8;
  cfg.stack.blocks = {{3, false}, {4, true}};
  cfg.embed_dim = 8;
  cfg.num_taps = 2;
  cfg.num_classes = num_classes;
  return cfg;
}

style::LayerTapSet BackboneConfig::tap_set(int taps_used) const {
  if (taps_used < 1 || taps_used > num_taps ||
      taps_used > static_cast<int>(stack.blocks.size()))
    throw ConfigError("tap_set: taps_used out of range");
  style::LayerTapSet taps;
  for (int l = 0; l < taps_used; ++l) {
    taps.layers.push_back(l + 1);
    taps.channels.push_back(stack.blocks[static_cast<size_t>(l)].out_channels);
  }
  return taps;
}

BackboneParams init_backbone(const BackboneConfig& cfg, Rng& rng) {
  BackboneParams p;
  Rng stack_rng = rng.split(21);
  p.convs = nn::init_conv_stack(cfg.stack, stack_rng);
  const int64_t flat = cfg.stack.flat_size();
  p.embed_w = Tensor({cfg.embed_dim, flat});
  p.embed_b = Tensor({cfg.embed_dim});
  Rng w_rng = rng.split(22);
  double scale = std::sqrt(2.0 / static_cast<double>(flat));
  for (auto& v : p.embed_w.values()) v = scale * w_rng.gaussian();
  return p;
}

ClassifierParams init_classifier(const BackboneConfig& cfg, Rng& rng) {
  if (cfg.num_classes < 1)
    throw ConfigError("init_classifier: num_classes must be set");
  ClassifierParams p;
  p.w = Tensor({cfg.num_classes, cfg.embed_dim});
  Rng w_rng = rng.split(23);
  double scale = std::sqrt(1.0 / static_cast<double>(cfg.embed_dim));
  for (auto& v : p.w.values()) v = scale * w_rng.gaussian();
  return p;
}

ForwardResult forward(const Tensor& image, const BackboneConfig& cfg,
                      const BackboneParams& params,
                      const ClassifierParams* classifier,
                      ForwardTrace* trace) {
  ForwardTrace local;
  ForwardTrace& tr = trace ? *trace : local;
  Tensor last = nn::conv_stack_forward(image, cfg.stack, params.convs,
                                       &tr.stack);
  ForwardResult out;
  for (int l = 0; l < cfg.num_taps; ++l)
    out.taps.push_back(tr.stack.act[static_cast<size_t>(l)]);
  tr.flat = last.reshaped({cfg.stack.flat_size()});
  out.embedding = nn::linear_forward(params.embed_w, params.embed_b, tr.flat);
  if (classifier) {
    Tensor none;
    out.logits = nn::linear_forward(classifier->w, none, out.embedding);
  }
  return out;
}

Tensor softmax(const Tensor& logits) {
  double lse = logsumexp(logits.values());
  Tensor out(logits.shape());
  for (int64_t i = 0; i < logits.numel(); ++i)
    out[i] = std::exp(logits[i] - lse);
  return out;
}

double classification_loss(const Tensor& logits, int64_t label) {
  if (label < 0 || label >= logits.numel())
    throw ConfigError("classification_loss: label out of range");
  return logsumexp(logits.values()) - logits[label];
}

Tensor classification_loss_backward(const Tensor& logits, int64_t label) {
  Tensor g = softmax(logits);
  g[label] -= 1.0;
  return g;
}

ParamGrads zero_param_grads(const BackboneParams& bp,
                            const ClassifierParams& cp) {
  ParamGrads g;
  g.conv = nn::zero_conv_grads(bp.convs);
  g.embed_w = Tensor(bp.embed_w.shape());
  g.embed_b = Tensor(bp.embed_b.shape());
  g.classifier_w = Tensor(cp.w.shape());
  return g;
}

LossBreakdown adaptation_loss(const Batch& source, const Batch& target,
                              const BackboneConfig& cfg,
                              const BackboneParams& bp,
                              const ClassifierParams& cp, Mode mode,
                              double lambda, int sinkhorn_budget,
                              int taps_used, const StyleOptions& style_opts,
                              const std::vector<double>* ps_weights,
                              ParamGrads* grads, GradTape* tape) {
  const size_t nb = source.images.size();
  if (nb == 0) throw ConfigError("adaptation_loss: empty source batch");
  if (source.labels.size() != nb)
    throw ConfigError("adaptation_loss: source batch must be labeled");
  const bool with_style = mode == Mode::Sm || mode == Mode::PsSm;
  const bool with_mmd = mode == Mode::Mmd;
  const bool with_ps = mode == Mode::Ps || mode == Mode::PsSm;
  if ((with_style || with_mmd) && target.images.empty())
    throw ConfigError("adaptation_loss: mode needs a target batch");
  if (with_ps && (!ps_weights || ps_weights->size() != nb))
    throw ConfigError(
        "adaptation_loss: ps mode needs one discriminator score per source "
        "image");
  if (with_style && !style_opts.eps)
    throw ConfigError("adaptation_loss: sm mode needs eps states");

  const style::LayerTapSet taps =
      with_style ? cfg.tap_set(taps_used) : style::LayerTapSet{};

  // forwards
  std::vector<ForwardTrace> straces(grads ? nb : 0);
  std::vector<ForwardResult> sres;
  sres.reserve(nb);
  for (size_t i = 0; i < nb; ++i)
    sres.push_back(forward(source.images[i], cfg, bp, &cp,
                           grads ? &straces[i] : nullptr));
  const size_t mb = (with_style || with_mmd) ? target.images.size() : 0;
  std::vector<ForwardTrace> ttraces(grads ? mb : 0);
  std::vector<ForwardResult> tres;
  tres.reserve(mb);
  for (size_t j = 0; j < mb; ++j)
    tres.push_back(forward(target.images[j], cfg, bp, nullptr,
                           grads ? &ttraces[j] : nullptr));

  LossBreakdown lb;
  const double inv_b = 1.0 / static_cast<double>(nb);
  for (size_t i = 0; i < nb; ++i) {
    double w = with_ps ? (*ps_weights)[i] : 1.0;
    lb.classification +=
        inv_b * w * classification_loss(sres[i].logits, source.labels[i]);
  }
  lb.total = lb.classification;

  style::StyleLossGrads style_grads;
  style::BatchTaps src_taps, tgt_taps;
  if (with_style) {
    src_taps.resize(taps.count());
    tgt_taps.resize(taps.count());
    for (size_t l = 0; l < taps.count(); ++l) {
      for (size_t i = 0; i < nb; ++i) src_taps[l].push_back(sres[i].taps[l]);
      for (size_t j = 0; j < mb; ++j) tgt_taps[l].push_back(tres[j].taps[l]);
    }
    if (style_opts.update_eps)
      style::update_style_eps(src_taps, tgt_taps, taps, *style_opts.eps,
                              style_opts.eps_squared);
    if (grads) {
      style_grads = style::style_matching_loss_grad(
          src_taps, tgt_taps, taps, *style_opts.eps, sinkhorn_budget);
      lb.style = style_grads.loss.total;
      lb.eps_mu = style_grads.loss.mu_eps;
      lb.eps_sigma = style_grads.loss.sigma_eps;
    } else {
      style::StyleLossBreakdown sl = style::style_matching_loss(
          src_taps, tgt_taps, taps, *style_opts.eps, sinkhorn_budget);
      lb.style = sl.total;
      lb.eps_mu = sl.mu_eps;
      lb.eps_sigma = sl.sigma_eps;
    }
    lb.total += lambda * lb.style;
  }

  style::MmdGrad mmd_grads;
  std::vector<double> mmd_bw;
  if (with_mmd) {
    Tensor src_pts({static_cast<int64_t>(nb), cfg.embed_dim});
    Tensor tgt_pts({static_cast<int64_t>(mb), cfg.embed_dim});
    for (size_t i = 0; i < nb; ++i)
      for (int64_t d = 0; d < cfg.embed_dim; ++d)
        src_pts.at(static_cast<int64_t>(i), d) = sres[i].embedding[d];
    for (size_t j = 0; j < mb; ++j)
      for (int64_t d = 0; d < cfg.embed_dim; ++d)
        tgt_pts.at(static_cast<int64_t>(j), d) = tres[j].embedding[d];
    sinkhorn::Measure src_m(src_pts), tgt_m(tgt_pts);
    // bandwidths are constants w.r.t. the parameters, like eps
    mmd_bw = style_opts.mmd_bandwidths
                 ? *style_opts.mmd_bandwidths
                 : style::default_bandwidths(src_m, tgt_m);
    mmd_grads = style::mmd_loss_grad(src_m, tgt_m, mmd_bw);
    lb.mmd = mmd_grads.value;
    lb.total += lambda * lb.mmd;
  }

  if (tape) {
    tape->mode = mode;
    tape->lambda = lambda;
    tape->sinkhorn_budget = sinkhorn_budget;
    tape->taps_used = taps_used;
    tape->source = source;
    tape->target = (with_style || with_mmd) ? target : Batch{};
    tape->ps_weights = with_ps ? *ps_weights : std::vector<double>{};
    tape->eps = with_style ? *style_opts.eps : style::StyleEps{};
    tape->mmd_bandwidths = mmd_bw;
    tape->recorded_loss = lb.total;
  }

  if (!grads) return lb;

  // reverse pass, source images
  const size_t stack_layers = bp.convs.size();
  for (size_t i = 0; i < nb; ++i) {
    double w = with_ps ? (*ps_weights)[i] : 1.0;
    Tensor dlogits =
        classification_loss_backward(sres[i].logits, source.labels[i]);
    for (auto& v : dlogits.values()) v *= inv_b * w;
    Tensor none;
    Tensor dnone;
    Tensor demb = nn::linear_backward(cp.w, sres[i].embedding, dlogits,
                                      grads->classifier_w, dnone);
    if (with_mmd)
      for (int64_t d = 0; d < cfg.embed_dim; ++d)
        demb[d] += lambda * mmd_grads.grad_p.at(static_cast<int64_t>(i), d);
    Tensor dflat = nn::linear_backward(bp.embed_w, straces[i].flat, demb,
                                       grads->embed_w, grads->embed_b);
    std::vector<Tensor> d_act(stack_layers);
    d_act[stack_layers - 1] =
        dflat.reshaped(straces[i].stack.act.back().shape());
    if (with_style)
      for (size_t l = 0; l < taps.count(); ++l) {
        Tensor inject = scaled(style_grads.d_source[l][i], lambda);
        if (d_act[l].numel() == 0)
          d_act[l] = std::move(inject);
        else
          add_scaled(d_act[l], 1.0, inject);
      }
    nn::conv_stack_backward(cfg.stack, bp.convs, straces[i].stack, d_act,
                            grads->conv);
  }

  // reverse pass, target images (style taps and/or mmd embedding grads)
  for (size_t j = 0; j < mb; ++j) {
    std::vector<Tensor> d_act(stack_layers);
    if (with_mmd) {
      Tensor demb({cfg.embed_dim});
      for (int64_t d = 0; d < cfg.embed_dim; ++d)
        demb[d] = lambda * mmd_grads.grad_q.at(static_cast<int64_t>(j), d);
      Tensor dflat = nn::linear_backward(bp.embed_w, ttraces[j].flat, demb,
                                         grads->embed_w, grads->embed_b);
      d_act[stack_layers - 1] =
          dflat.reshaped(ttraces[j].stack.act.back().shape());
    }
    if (with_style)
      for (size_t l = 0; l < taps.count(); ++l) {
        Tensor inject = scaled(style_grads.d_target[l][j], lambda);
        if (d_act[l].numel() == 0)
          d_act[l] = std::move(inject);
        else
          add_scaled(d_act[l], 1.0, inject);
      }
    nn::conv_stack_backward(cfg.stack, bp.convs, ttraces[j].stack, d_act,
                            grads->conv);
  }
  return lb;
}

double replay(const GradTape& tape, const BackboneConfig& cfg,
              const BackboneParams& bp, const ClassifierParams& cp) {
  style::StyleEps eps = tape.eps;  // frozen: no update on replay
  StyleOptions opts;
  opts.eps = &eps;
  opts.update_eps = false;
  if (!tape.mmd_bandwidths.empty()) opts.mmd_bandwidths = &tape.mmd_bandwidths;
  LossBreakdown lb = adaptation_loss(
      tape.source, tape.target, cfg, bp, cp, tape.mode, tape.lambda,
      tape.sinkhorn_budget, tape.taps_used, opts,
      tape.ps_weights.empty() ? nullptr : &tape.ps_weights);
  return lb.total;
}

void sgd_step(const std::vector<Tensor*>& params,
              const std::vector<const Tensor*>& grads, double lr,
              double momentum, std::vector<Tensor>& velocity) {
  if (params.size() != grads.size())
    throw ConfigError("sgd_step: params/grads mismatch");
  if (velocity.empty())
    for (const Tensor* p : params) velocity.emplace_back(p->shape());
  if (velocity.size() != params.size())
    throw ConfigError("sgd_step: velocity mismatch");
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = *grads[i];
    Tensor& v = velocity[i];
    if (!p.same_shape(g) || !p.same_shape(v))
      throw ShapeError("sgd_step: shape mismatch");
    require_finite(g, "sgd_step gradient");
    const size_t n = static_cast<size_t>(p.numel());
    kernels::ops().scale(momentum, v.data(), v.data(), n);
    kernels::ops().add(v.data(), g.data(), v.data(), n);
    kernels::ops().axpy(-lr, v.data(), p.data(), n);
  }
}

std::vector<Tensor*> collect_params(BackboneParams& bp, ClassifierParams& cp) {
  std::vector<Tensor*> out;
  for (nn::ConvLayer& layer : bp.convs) {
    out.push_back(&layer.w);
    out.push_back(&layer.b);
  }
  out.push_back(&bp.embed_w);
  out.push_back(&bp.embed_b);
  out.push_back(&cp.w);
  return out;
}

std::vector<const Tensor*> collect_grads(const ParamGrads& g) {
  std::vector<const Tensor*> out;
  for (size_t i = 0; i < g.conv.dw.size(); ++i) {
    out.push_back(&g.conv.dw[i]);
    out.push_back(&g.conv.db[i]);
  }
  out.push_back(&g.embed_w);
  out.push_back(&g.embed_b);
  out.push_back(&g.classifier_w);
  return out;
}

namespace {

Batch gather_batch(const LabeledImageSet& set, const std::vector<size_t>& idx,
                   size_t start, size_t end) {
  Batch b;
  for (size_t i = start; i < end; ++i) {
    b.images.push_back(set.images[idx[i]]);
    if (!set.labels.empty()) b.labels.push_back(set.labels[idx[i]]);
  }
  return b;
}

void record_epoch_mean(std::vector<CurvePoint>& curves, int epoch,
                       const std::string& term, double sum, int count) {
  curves.push_back(
      {epoch, -1, term, sum / static_cast<double>(std::max(count, 1))});
}

}  // namespace

TrainResult train_baseline(const LabeledImageSet& source,
                           const BackboneConfig& cfg, const TrainConfig& tc,
                           Rng& rng) {
  if (source.images.empty() || source.labels.size() != source.images.size())
    throw ConfigError("train_baseline: needs a labeled source set");
  TrainResult result;
  Rng brng = rng.split(1);
  Rng crng = rng.split(2);
  result.backbone = init_backbone(cfg, brng);
  result.classifier = init_classifier(cfg, crng);

  std::vector<Tensor*> params =
      collect_params(result.backbone, result.classifier);
  std::vector<Tensor> velocity;

  std::vector<size_t> order(source.images.size());
  std::iota(order.begin(), order.end(), 0);
  const int e_half = tc.baseline_epochs / 2;
  const int e_three_quarters = (3 * tc.baseline_epochs) / 4;

  for (int epoch = 0; epoch < tc.baseline_epochs; ++epoch) {
    double lr = tc.baseline_lr;
    if (epoch >= e_half) lr *= tc.lr_decay;
    if (epoch >= e_three_quarters) lr *= tc.lr_decay;
    Rng ep_rng = rng.split(100 + static_cast<uint64_t>(epoch));
    ep_rng.shuffle(order);
    double loss_sum = 0.0;
    int batches = 0;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(tc.batch_size)) {
      size_t end =
          std::min(order.size(), start + static_cast<size_t>(tc.batch_size));
      Batch batch = gather_batch(source, order, start, end);
      ParamGrads grads =
          zero_param_grads(result.backbone, result.classifier);
      LossBreakdown lb = adaptation_loss(
          batch, Batch{}, cfg, result.backbone, result.classifier,
          Mode::Baseline, 0.0, tc.sinkhorn_budget, 0, StyleOptions{}, nullptr,
          &grads);
      if (!std::isfinite(lb.total))
        throw NumericError("train_baseline: non-finite loss at epoch " +
                           std::to_string(epoch) + ", batch " +
                           std::to_string(batches));
      sgd_step(params, collect_grads(grads), lr, tc.momentum, velocity);
      result.curves.push_back({epoch, batches, "L_c", lb.classification});
      loss_sum += lb.total;
      ++batches;
    }
    record_epoch_mean(result.curves, epoch, "epoch_L_c", loss_sum, batches);
  }
  return result;
}

TrainResult adapt(BackboneParams bp, ClassifierParams cp,
                  const LabeledImageSet& source,
                  const std::vector<Tensor>& target_images,
                  const BackboneConfig& cfg, const TrainConfig& tc, Rng& rng,
                  const disc::Config* disc_cfg,
                  const disc::Params* disc_params) {
  const bool with_style = tc.mode == Mode::Sm || tc.mode == Mode::PsSm;
  const bool with_mmd = tc.mode == Mode::Mmd;
  const bool with_ps = tc.mode == Mode::Ps || tc.mode == Mode::PsSm;
  if (with_ps && (!disc_cfg || !disc_params))
    throw ConfigError("adapt: ps mode needs a trained discriminator");
  if ((with_style || with_mmd) && target_images.empty())
    throw ConfigError("adapt: sm/mmd mode needs target images");

  TrainResult result;
  result.backbone = std::move(bp);
  result.classifier = std::move(cp);
  result.eps = style::make_style_eps(
      static_cast<size_t>(std::max(tc.taps_used, 0)), tc.eps_momentum);
  bool eps_fixed = false;
  if (tc.fixed_eps_mu && tc.fixed_eps_sigma) {
    if (tc.fixed_eps_mu->size() != result.eps.mu.size() ||
        tc.fixed_eps_sigma->size() != result.eps.sigma.size())
      throw ConfigError("adapt: fixed eps list length != taps_used");
    for (size_t l = 0; l < result.eps.mu.size(); ++l) {
      result.eps.mu[l].eps = (*tc.fixed_eps_mu)[l];
      result.eps.mu[l].initialized = true;
      result.eps.sigma[l].eps = (*tc.fixed_eps_sigma)[l];
      result.eps.sigma[l].initialized = true;
    }
    eps_fixed = true;
  }

  std::vector<Tensor*> params =
      collect_params(result.backbone, result.classifier);
  std::vector<Tensor> velocity;

  std::vector<size_t> sorder(source.images.size());
  std::iota(sorder.begin(), sorder.end(), 0);
  std::vector<size_t> torder(target_images.size());
  std::iota(torder.begin(), torder.end(), 0);

  for (int epoch = 0; epoch < tc.adapt_epochs; ++epoch) {
    Rng ep_rng = rng.split(5000 + static_cast<uint64_t>(epoch));
    ep_rng.shuffle(sorder);
    if (!torder.empty()) {
      Rng t_rng = rng.split(6000 + static_cast<uint64_t>(epoch));
      t_rng.shuffle(torder);
    }
    size_t tpos = 0;
    double loss_sum = 0.0;
    int batches = 0;
    for (size_t start = 0; start < sorder.size();
         start += static_cast<size_t>(tc.batch_size)) {
      size_t end =
          std::min(sorder.size(), start + static_cast<size_t>(tc.batch_size));
      Batch sbatch = gather_batch(source, sorder, start, end);
      Batch tbatch;
      if (with_style || with_mmd) {
        for (int64_t k = 0; k < tc.batch_size; ++k) {
          tbatch.images.push_back(target_images[torder[tpos]]);
          tpos = (tpos + 1) % torder.size();
        }
      }
      std::vector<double> ps_weights;
      if (with_ps)
        for (const Tensor& img : sbatch.images)
          ps_weights.push_back(disc::score(img, *disc_cfg, *disc_params));

      StyleOptions opts;
      opts.eps = &result.eps;
      opts.update_eps = with_style && !eps_fixed;
      opts.eps_squared = tc.eps_squared;

      ParamGrads grads = zero_param_grads(result.backbone, result.classifier);
      LossBreakdown lb = adaptation_loss(
          sbatch, tbatch, cfg, result.backbone, result.classifier, tc.mode,
          tc.lambda, tc.sinkhorn_budget, tc.taps_used, opts,
          with_ps ? &ps_weights : nullptr, &grads);
      if (!std::isfinite(lb.total))
        throw NumericError("adapt: non-finite loss at epoch " +
                           std::to_string(epoch) + ", batch " +
                           std::to_string(batches));
      sgd_step(params, collect_grads(grads), tc.adapt_lr, tc.momentum,
               velocity);

      result.curves.push_back({epoch, batches, "L_total", lb.total});
      result.curves.push_back({epoch, batches, "L_c", lb.classification});
      if (with_style) {
        result.curves.push_back({epoch, batches, "L_s", lb.style});
        for (size_t l = 0; l < lb.eps_mu.size(); ++l) {
          result.curves.push_back({epoch, batches,
                                   "eps_l" + std::to_string(l + 1) + "_mu",
                                   lb.eps_mu[l]});
          result.curves.push_back({epoch, batches,
                                   "eps_l" + std::to_string(l + 1) + "_sigma",
                                   lb.eps_sigma[l]});
        }
      }
      if (with_mmd) result.curves.push_back({epoch, batches, "L_mmd", lb.mmd});
      loss_sum += lb.total;
      ++batches;
    }
    record_epoch_mean(result.curves, epoch, "epoch_L_total", loss_sum,
                      batches);
  }
  return result;
}

TrainResult train(const LabeledImageSet& source,
                  const std::vector<Tensor>& target_images,
                  const BackboneConfig& cfg, const TrainConfig& tc, Rng& rng,
                  const disc::Config* disc_cfg,
                  const disc::Params* disc_params) {
  TrainResult base = train_baseline(source, cfg, tc, rng);
  if (tc.adapt_epochs <= 0 || tc.mode == Mode::Baseline) return base;
  TrainResult adapted =
      adapt(std::move(base.backbone), std::move(base.classifier), source,
            target_images, cfg, tc, rng, disc_cfg, disc_params);
  for (auto& c : adapted.curves) c.epoch += tc.baseline_epochs;
  base.curves.insert(base.curves.end(), adapted.curves.begin(),
                     adapted.curves.end());
  adapted.curves = std::move(base.curves);
  return adapted;
}

EmbedStats embed_stats(const std::vector<Tensor>& embeddings,
                       const std::vector<int64_t>& labels) {
  if (embeddings.size() != labels.size() || embeddings.size() < 2)
    throw ConfigError("embed_stats: needs >= 2 labeled embeddings");
  const size_t n = embeddings.size();

  auto cosine = [](const Tensor& a, const Tensor& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int64_t i = 0; i < a.numel(); ++i) {
      dot += a[i] * b[i];
      na += a[i] * a[i];
      nb += b[i] * b[i];
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
  };

  double intra_sum = 0.0, intra_sq = 0.0, inter_sum = 0.0, inter_sq = 0.0;
  int64_t intra_n = 0, inter_n = 0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      double c = cosine(embeddings[i], embeddings[j]);
      if (labels[i] == labels[j]) {
        intra_sum += c;
        intra_sq += c * c;
        ++intra_n;
      } else {
        inter_sum += c;
        inter_sq += c * c;
        ++inter_n;
      }
    }

  EmbedStats st;
  auto finish = [](double sum, double sq, int64_t count) {
    MeanSd ms;
    if (count > 0) {
      ms.mean = sum / static_cast<double>(count);
      double var = sq / static_cast<double>(count) - ms.mean * ms.mean;
      ms.sd = std::sqrt(std::max(0.0, var));
    }
    return ms;
  };
  st.intra_cos = finish(intra_sum, intra_sq, intra_n);
  st.inter_cos = finish(inter_sum, inter_sq, inter_n);
  st.inter_defined = inter_n > 0;

  double norm_sum = 0.0, norm_sq = 0.0;
  for (const Tensor& e : embeddings) {
    double n2 = 0.0;
    for (double v : e.values()) n2 += v * v;
    double norm = std::sqrt(n2);
    norm_sum += norm;
    norm_sq += norm * norm;
  }
  st.norm = finish(norm_sum, norm_sq, static_cast<int64_t>(n));
  return st;
}

}  // namespace stylematch::net
