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

#include "maxfeat/knn.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "maxfeat/baselines.hpp"
#include "maxfeat/errors.hpp"

namespace maxfeat {

KnnModel KnnModel::fit(const SparseMatrix& features, std::span<const Index> train_items,
                       const FeatureRanking& ranking, Index n_select, const KnnParams& params) {
  if (params.neighbors < 0) throw Error(ErrorCode::kInvalidArgument, "neighbor cap must be nonnegative");
  if (ranking.n_features != features.cols())
    throw Error(ErrorCode::kShapeMismatch, "ranking and feature matrix disagree on the feature count");
  KnnModel model;
  model.params_ = params;
  model.n_features_ = features.cols();
  model.selected_ = ranking.prefix(n_select);
  std::sort(model.selected_.begin(), model.selected_.end());

  std::vector<Triplet> picks;
  picks.reserve(model.selected_.size());
  for (std::size_t t = 0; t < model.selected_.size(); ++t)
    picks.emplace_back(model.selected_[t], static_cast<Index>(t), 1.0);
  model.selector_.resize(features.cols(), static_cast<Index>(model.selected_.size()));
  model.selector_.setFromTriplets(picks.begin(), picks.end());

  model.local_.assign(static_cast<std::size_t>(features.rows()), -1);
  std::vector<Triplet> rows;
  for (Index item : train_items) {
    if (item < 0 || item >= features.rows()) throw Error(ErrorCode::kUnknownItem, "train item out of range");
    if (model.local_[item] >= 0) continue;
    const Index local = static_cast<Index>(model.train_items_.size());
    model.local_[item] = local;
    model.train_items_.push_back(item);
    for (SparseMatrix::InnerIterator it(features, item); it; ++it) rows.emplace_back(local, it.col(), it.value());
  }
  SparseMatrix train(static_cast<Index>(model.train_items_.size()), features.cols());
  train.setFromTriplets(rows.begin(), rows.end());
  model.train_rows_ = model.project(train);
  return model;
}

SparseMatrix KnnModel::project(const SparseMatrix& item_features) const {
  if (item_features.cols() != n_features_)
    throw Error(ErrorCode::kShapeMismatch, "item rows must span the full feature space");
  SparseMatrix restricted = item_features * selector_;
  restricted.prune(0.0);
  return normalize_feature_rows(restricted);
}

ColdCatalog KnnModel::prepare(const SparseMatrix& cold_features) const {
  ColdCatalog catalog;
  catalog.rows = project(cold_features);
  if (params_.neighbors > 0) {
    const DenseMatrix sims = DenseMatrix(catalog.rows * SparseMatrix(train_rows_.transpose()));
    std::vector<Triplet> kept;
    std::vector<Index> idx(static_cast<std::size_t>(sims.cols()));
    const auto cap = std::min<Index>(params_.neighbors, sims.cols());
    for (Index c = 0; c < sims.rows(); ++c) {
      std::iota(idx.begin(), idx.end(), Index{0});
      std::partial_sort(idx.begin(), idx.begin() + cap, idx.end(), [&](Index a, Index b) {
        return sims(c, a) > sims(c, b) || (sims(c, a) == sims(c, b) && a < b);
      });
      for (Index t = 0; t < cap; ++t)
        if (sims(c, idx[t]) != 0.0) kept.emplace_back(c, idx[t], sims(c, idx[t]));
    }
    catalog.neighbors.resize(sims.rows(), sims.cols());
    catalog.neighbors.setFromTriplets(kept.begin(), kept.end());
  }
  return catalog;
}

Vector KnnModel::score(const ColdCatalog& catalog, std::span<const Index> history) const {
  auto local_of = [&](Index item) {
    const Index local = (item >= 0 && item < static_cast<Index>(local_.size())) ? local_[item] : -1;
    if (local < 0) throw Error(ErrorCode::kUnknownItem, "history item " + std::to_string(item) + " is not a train item");
    return local;
  };
  if (params_.neighbors > 0) {
    Vector counts = Vector::Zero(train_rows_.rows());
    for (Index item : history) counts(local_of(item)) += 1.0;
    return catalog.neighbors * counts;
  }
  Vector profile = Vector::Zero(train_rows_.cols());
  for (Index item : history)
    for (SparseMatrix::InnerIterator it(train_rows_, local_of(item)); it; ++it) profile(it.col()) += it.value();
  return catalog.rows * profile;
}

Vector KnnModel::score_cold_items(std::span<const Index> history, const SparseMatrix& cold_features) const {
  return score(prepare(cold_features), history);
}

std::vector<Index> recommend_top_n(const Vector& scores, Index n) {
  const Index size = scores.size();
  const Index take = std::clamp<Index>(n, 0, size);
  std::vector<Index> idx(static_cast<std::size_t>(size));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::partial_sort(idx.begin(), idx.begin() + take, idx.end(), [&](Index a, Index b) {
    return scores(a) > scores(b) || (scores(a) == scores(b) && a < b);
  });
  idx.resize(static_cast<std::size_t>(take));
  return idx;
}

}  // namespace maxfeat
