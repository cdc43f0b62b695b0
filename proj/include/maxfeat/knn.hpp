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

#include <span>
#include <vector>

#include "maxfeat/linalg.hpp"
#include "maxfeat/ranking.hpp"

namespace maxfeat {

struct KnnParams {
  // Keep only this many most similar train items per cold item; 0 keeps all.
  Index neighbors = 0;
};

// Cold items projected onto a model's feature subset.
struct ColdCatalog {
  SparseMatrix rows;       // n_cold x n_selected, unit or zero rows
  SparseMatrix neighbors;  // n_cold x n_train similarities, only with a neighbor cap
};

// Content-based ItemKNN: score(c) = sum over the user's history of cos(f_c, f_i),
// with cosines taken over the selected feature columns only.
class KnnModel {
 public:
  // `features` covers every item of the dataset; rows listed in `train_items`
  // form the model's neighborhood.
  static KnnModel fit(const SparseMatrix& features, std::span<const Index> train_items,
                      const FeatureRanking& ranking, Index n_select, const KnnParams& params = {});

  // Restricts item rows to the selected columns and normalizes them.
  SparseMatrix project(const SparseMatrix& item_features) const;
  ColdCatalog prepare(const SparseMatrix& cold_features) const;

  // `history` holds dataset item indices; each must be a train item. Repeated
  // entries count repeatedly.
  Vector score(const ColdCatalog& catalog, std::span<const Index> history) const;
  Vector score_cold_items(std::span<const Index> history, const SparseMatrix& cold_features) const;

  // Selected feature columns in ascending order.
  const std::vector<Index>& selected() const { return selected_; }
  const std::vector<Index>& train_items() const { return train_items_; }
  const SparseMatrix& train_rows() const { return train_rows_; }

 private:
  std::vector<Index> selected_;
  std::vector<Index> train_items_;
  std::vector<Index> local_;  // dataset item index -> train row, -1 if absent
  Index n_features_ = 0;
  SparseMatrix selector_;    // n_features x n_selected column picker
  SparseMatrix train_rows_;  // n_train x n_selected
  KnnParams params_;
};

// Indices of the n largest scores, ties broken by lowest index.
std::vector<Index> recommend_top_n(const Vector& scores, Index n);

}  // namespace maxfeat
