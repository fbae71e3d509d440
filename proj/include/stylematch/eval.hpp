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

namespace stylematch::eval {

/// Two-stage mean: frames within each media averaged, then media averaged.
Tensor fuse_template(const std::vector<std::vector<Tensor>>& media_groups);

struct Template {
  int64_t id = 0;
  int64_t subject = 0;
  std::vector<std::vector<Tensor>> media;  // media -> frame embeddings
  Tensor fused;
};

Template make_template(int64_t id, int64_t subject,
                       std::vector<std::vector<Tensor>> media);

double cosine(const Tensor& a, const Tensor& b);

/// Accept when score >= threshold; thresholds are chosen from the observed
/// scores plus a max+ulp sentinel, the smallest feasible one wins.
struct RatePoint {
  double level = 0.0;
  double threshold = 0.0;
  double value = 0.0;       // TPR or TPIR at the threshold
  bool unreachable = false;  // too few negatives for the level
};

std::vector<RatePoint> tpr_at_fpr(const std::vector<double>& pos_scores,
                                  const std::vector<double>& neg_scores,
                                  const std::vector<double>& fpr_levels);

struct PairScore {
  double score = 0.0;
  bool positive = false;
  int fold = 0;
};

struct KfoldResult {
  double mean_accuracy = 0.0;
  double sd = 0.0;
  std::vector<double> fold_accuracy;
};

/// For each fold: the threshold maximizing accuracy on the other folds
/// (ties -> smallest threshold), evaluated on the held-out fold.
KfoldResult kfold_verification(const std::vector<PairScore>& pairs, int k);

struct SubjectEmbedding {
  Tensor embedding;
  int64_t subject = 0;
};

/// Closed-set rank-K accuracy; every probe subject must be in the gallery.
/// Similarity ties break by gallery order.
std::vector<double> rank_k(const std::vector<SubjectEmbedding>& probes,
                           const std::vector<SubjectEmbedding>& gallery,
                           const std::vector<int>& ks);

/// Open-set: FPIR from unknown-probe maxima, TPIR counts known probes whose
/// top-1 is the right subject and clears the threshold.
std::vector<RatePoint> tpir_at_fpir(
    const std::vector<SubjectEmbedding>& known_probes,
    const std::vector<SubjectEmbedding>& unknown_probes,
    const std::vector<SubjectEmbedding>& gallery,
    const std::vector<double>& fpir_levels);

}  // namespace stylematch::eval
