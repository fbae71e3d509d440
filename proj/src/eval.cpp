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

#include "stylematch/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace stylematch::eval {

Tensor fuse_template(const std::vector<std::vector<Tensor>>& media_groups) {
  std::vector<Tensor> media_means;
  for (const std::vector<Tensor>& frames : media_groups) {
    if (frames.empty()) continue;
    Tensor mean(frames.front().shape());
    for (const Tensor& f : frames) add_scaled(mean, 1.0, f);
    for (auto& v : mean.values()) v /= static_cast<double>(frames.size());
    media_means.push_back(std::move(mean));
  }
  if (media_means.empty())
    throw ConfigError("fuse_template: all media empty");
  Tensor fused(media_means.front().shape());
  for (const Tensor& m : media_means) add_scaled(fused, 1.0, m);
  for (auto& v : fused.values()) v /= static_cast<double>(media_means.size());
  return fused;
}

Template make_template(int64_t id, int64_t subject,
                       std::vector<std::vector<Tensor>> media) {
  Template t;
  t.id = id;
  t.subject = subject;
  t.media = std::move(media);
  t.fused = fuse_template(t.media);
  return t;
}

double cosine(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw ShapeError("cosine: shape mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (int64_t i = 0; i < a.numel(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw NumericError("cosine: zero-norm input");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

double next_up(double x) {
  return std::nextafter(x, std::numeric_limits<double>::infinity());
}

// count of sorted-ascending values >= t
int64_t count_at_least(const std::vector<double>& sorted_asc, double t) {
  return static_cast<int64_t>(
      sorted_asc.end() -
      std::lower_bound(sorted_asc.begin(), sorted_asc.end(), t));
}

// Candidate thresholds: one ulp above every observed score, plus the
// smallest observed score as the accept-everything representative.  Since
// acceptance is score >= t, these enumerate every achievable operating
// point, and "smallest t" resolves to the first representable value past a
// decision boundary.
std::vector<double> threshold_candidates(
    std::initializer_list<const std::vector<double>*> score_lists) {
  std::vector<double> out;
  double lo = std::numeric_limits<double>::infinity();
  for (const std::vector<double>* list : score_lists)
    for (double s : *list) {
      out.push_back(next_up(s));
      lo = std::min(lo, s);
    }
  out.push_back(lo);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

std::vector<RatePoint> tpr_at_fpr(const std::vector<double>& pos_scores,
                                  const std::vector<double>& neg_scores,
                                  const std::vector<double>& fpr_levels) {
  if (pos_scores.empty() || neg_scores.empty())
    throw ConfigError("tpr_at_fpr: empty score list");
  for (double level : fpr_levels)
    if (!(level > 0.0 && level < 1.0))
      throw ConfigError("tpr_at_fpr: levels must lie in (0,1)");

  std::vector<double> pos = pos_scores, neg = neg_scores;
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  const double n_neg = static_cast<double>(neg.size());
  const double n_pos = static_cast<double>(pos.size());
  const double sentinel = next_up(neg.back());

  std::vector<double> candidates = threshold_candidates({&pos, &neg});

  std::vector<RatePoint> out;
  for (double level : fpr_levels) {
    RatePoint rp;
    rp.level = level;
    rp.unreachable = n_neg * level < 1.0;
    if (rp.unreachable) {
      rp.threshold = sentinel;
    } else {
      // FPR(t) is non-increasing in t: binary search the smallest feasible
      // candidate.
      size_t lo = 0, hi = candidates.size() - 1;
      while (lo < hi) {
        size_t mid = (lo + hi) / 2;
        double fpr = static_cast<double>(count_at_least(neg, candidates[mid])) /
                     n_neg;
        if (fpr <= level)
          hi = mid;
        else
          lo = mid + 1;
      }
      rp.threshold = candidates[lo];
    }
    rp.value =
        static_cast<double>(count_at_least(pos, rp.threshold)) / n_pos;
    out.push_back(rp);
  }
  return out;
}

KfoldResult kfold_verification(const std::vector<PairScore>& pairs, int k) {
  if (k < 2) throw ConfigError("kfold_verification: k >= 2");
  std::vector<int64_t> fold_sizes(static_cast<size_t>(k), 0);
  for (const PairScore& p : pairs) {
    if (p.fold < 0 || p.fold >= k)
      throw ConfigError("kfold_verification: fold index out of range");
    ++fold_sizes[static_cast<size_t>(p.fold)];
  }
  for (int f = 0; f < k; ++f)
    if (fold_sizes[static_cast<size_t>(f)] == 0)
      throw ConfigError("kfold_verification: empty fold " + std::to_string(f));

  KfoldResult result;
  for (int held = 0; held < k; ++held) {
    std::vector<double> train_pos, train_neg;
    for (const PairScore& p : pairs) {
      if (p.fold == held) continue;
      (p.positive ? train_pos : train_neg).push_back(p.score);
    }
    std::sort(train_pos.begin(), train_pos.end());
    std::sort(train_neg.begin(), train_neg.end());
    const double n_train =
        static_cast<double>(train_pos.size() + train_neg.size());

    // Midpoints between adjacent observed scores (plus accept-all and
    // reject-all ends).  Unlike score-anchored candidates, a midpoint
    // threshold generalizes across folds whenever the pair score
    // distributions are separated by a margin.
    std::vector<double> merged = train_pos;
    merged.insert(merged.end(), train_neg.begin(), train_neg.end());
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    std::vector<double> candidates;
    candidates.push_back(merged.front());  // accepts everything
    for (size_t i = 0; i + 1 < merged.size(); ++i)
      candidates.push_back(0.5 * (merged[i] + merged[i + 1]));
    candidates.push_back(next_up(merged.back()));  // rejects everything

    double best_acc = -1.0, best_t = 0.0;
    for (double t : candidates) {  // ascending: ties keep the smallest t
      double correct =
          static_cast<double>(count_at_least(train_pos, t)) +
          static_cast<double>(train_neg.size()) -
          static_cast<double>(count_at_least(train_neg, t));
      double acc = correct / n_train;
      if (acc > best_acc) {
        best_acc = acc;
        best_t = t;
      }
    }

    int64_t held_correct = 0, held_total = 0;
    for (const PairScore& p : pairs) {
      if (p.fold != held) continue;
      bool accept = p.score >= best_t;
      if (accept == p.positive) ++held_correct;
      ++held_total;
    }
    result.fold_accuracy.push_back(static_cast<double>(held_correct) /
                                   static_cast<double>(held_total));
  }

  double sum = 0.0;
  for (double a : result.fold_accuracy) sum += a;
  result.mean_accuracy = sum / static_cast<double>(k);
  double var = 0.0;
  for (double a : result.fold_accuracy) {
    double d = a - result.mean_accuracy;
    var += d * d;
  }
  result.sd = std::sqrt(var / static_cast<double>(k));
  return result;
}

std::vector<double> rank_k(const std::vector<SubjectEmbedding>& probes,
                           const std::vector<SubjectEmbedding>& gallery,
                           const std::vector<int>& ks) {
  if (probes.empty() || gallery.empty())
    throw ConfigError("rank_k: empty probe or gallery set");
  std::set<int64_t> gallery_subjects;
  for (const SubjectEmbedding& g : gallery) gallery_subjects.insert(g.subject);
  for (const SubjectEmbedding& p : probes)
    if (!gallery_subjects.count(p.subject))
      throw ConfigError("rank_k: probe subject missing from gallery");

  std::vector<int64_t> correct_at(ks.size(), 0);
  std::vector<std::pair<double, size_t>> order(gallery.size());
  for (const SubjectEmbedding& probe : probes) {
    for (size_t gi = 0; gi < gallery.size(); ++gi)
      order[gi] = {cosine(probe.embedding, gallery[gi].embedding), gi};
    // highest similarity first; equal scores keep gallery order
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) {
                       return a.first > b.first;
                     });
    for (size_t ki = 0; ki < ks.size(); ++ki) {
      int kk = ks[ki];
      bool hit = false;
      for (int r = 0; r < kk && r < static_cast<int>(order.size()); ++r)
        if (gallery[order[static_cast<size_t>(r)].second].subject ==
            probe.subject) {
          hit = true;
          break;
        }
      if (hit) ++correct_at[ki];
    }
  }
  std::vector<double> out;
  for (size_t ki = 0; ki < ks.size(); ++ki)
    out.push_back(static_cast<double>(correct_at[ki]) /
                  static_cast<double>(probes.size()));
  return out;
}

std::vector<RatePoint> tpir_at_fpir(
    const std::vector<SubjectEmbedding>& known_probes,
    const std::vector<SubjectEmbedding>& unknown_probes,
    const std::vector<SubjectEmbedding>& gallery,
    const std::vector<double>& fpir_levels) {
  if (known_probes.empty() || unknown_probes.empty() || gallery.empty())
    throw ConfigError("tpir_at_fpir: empty probe or gallery set");
  std::set<int64_t> gallery_subjects;
  for (const SubjectEmbedding& g : gallery) gallery_subjects.insert(g.subject);
  for (const SubjectEmbedding& u : unknown_probes)
    if (gallery_subjects.count(u.subject))
      throw ConfigError("tpir_at_fpir: unknown probe subject is enrolled");

  auto top_match = [&](const SubjectEmbedding& probe) {
    double best = -std::numeric_limits<double>::infinity();
    size_t best_gi = 0;
    for (size_t gi = 0; gi < gallery.size(); ++gi) {
      double s = cosine(probe.embedding, gallery[gi].embedding);
      if (s > best) {  // strict: equal scores keep the earlier gallery entry
        best = s;
        best_gi = gi;
      }
    }
    return std::make_pair(best, best_gi);
  };

  std::vector<double> unknown_max;
  for (const SubjectEmbedding& u : unknown_probes)
    unknown_max.push_back(top_match(u).first);
  std::sort(unknown_max.begin(), unknown_max.end());

  struct Known {
    double top = 0.0;
    bool correct = false;
  };
  std::vector<Known> knowns;
  for (const SubjectEmbedding& kp : known_probes) {
    auto [best, gi] = top_match(kp);
    knowns.push_back({best, gallery[gi].subject == kp.subject});
  }

  const double n_unknown = static_cast<double>(unknown_max.size());
  const double sentinel = next_up(unknown_max.back());

  std::vector<double> known_tops;
  for (const Known& kn : knowns) known_tops.push_back(kn.top);
  std::vector<double> candidates =
      threshold_candidates({&unknown_max, &known_tops});

  std::vector<RatePoint> out;
  for (double level : fpir_levels) {
    if (!(level > 0.0 && level < 1.0))
      throw ConfigError("tpir_at_fpir: levels must lie in (0,1)");
    RatePoint rp;
    rp.level = level;
    rp.unreachable = n_unknown * level < 1.0;
    if (rp.unreachable) {
      rp.threshold = sentinel;
    } else {
      size_t lo = 0, hi = candidates.size() - 1;
      while (lo < hi) {
        size_t mid = (lo + hi) / 2;
        double fpir =
            static_cast<double>(count_at_least(unknown_max, candidates[mid])) /
            n_unknown;
        if (fpir <= level)
          hi = mid;
        else
          lo = mid + 1;
      }
      rp.threshold = candidates[lo];
    }
    int64_t hits = 0;
    for (const Known& kn : knowns)
      if (kn.correct && kn.top >= rp.threshold) ++hits;
    rp.value = static_cast<double>(hits) /
               static_cast<double>(knowns.size());
    out.push_back(rp);
  }
  return out;
}

}  // namespace stylematch::eval
