// Copyright 2026 The maxfeat Authors
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

#include <cstdint>
#include <vector>

#include "maxfeat/linalg.hpp"
#include "maxfeat/mix.hpp"
#include "maxfeat/ranking.hpp"

namespace maxfeat {

struct CfecbfParams {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double learning_rate = 0.1;
  Index epochs = 200;
  std::uint64_t seed = 0;  // initialization is deterministic (all ones)

  void validate() const;
};

struct CfecbfResult {
  Vector weights;
  // Objective value before the first epoch and after every epoch.
  std::vector<double> loss_history;
  FeatureRanking ranking;
};

FeatureRanking select_random(Index n_features, Index n_select, std::uint64_t seed);

// Features ranked by w = e^T R F, the interaction mass of the items carrying them.
FeatureRanking select_popular(const SparseMatrix& interactions, const SparseMatrix& features, Index n_select);

// diag(F F^T)^(-1/2) F; zero rows stay zero.
SparseMatrix normalize_feature_rows(const SparseMatrix& features);

// Objective minimized by the CFeCBF baseline:
//   |S_cf - Fn diag(w) Fn^T|_F^2 + lambda1 |w|_1 + lambda2 |w|_2^2
// where Fn = normalize_feature_rows(F).
double cfecbf_loss(const DenseMatrix& collaborative, const SparseMatrix& normalized_features, const Vector& w,
                   const CfecbfParams& params);
// Gradient of the smooth part (everything but the l1 term).
Vector cfecbf_gradient(const DenseMatrix& collaborative, const SparseMatrix& normalized_features, const Vector& w,
                       const CfecbfParams& params);

// Proximal gradient descent from w = 1 with backtracking so that the loss never
// increases. Throws NonFiniteLoss when the objective overflows.
CfecbfResult train_cfecbf(const DenseMatrix& collaborative, const SparseMatrix& features, const CfecbfParams& params);
FeatureRanking cfecbf_weights(const DenseMatrix& collaborative, const SparseMatrix& features,
                              const CfecbfParams& params);

// Features ranked by the Euclidean norm of their embedding rows.
FeatureRanking select_by_norm(const FeatureEmbeddings& embeddings, Index n_select);

// Indices of `values` sorted nonincreasing, ties by lowest index.
std::vector<Index> argsort_descending(const Vector& values);

}  // namespace maxfeat
