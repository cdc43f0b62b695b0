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
#include <filesystem>
#include <functional>

#include "maxfeat/dataset.hpp"
#include "maxfeat/linalg.hpp"

namespace maxfeat {

struct MixParams {
  double alpha = 0.5;  // weight of the collaborative similarity, in [0, 1]
  double p = 0.0;      // item popularity exponent
  Index k = 100;       // embedding rank
  std::uint64_t seed = 0;

  void validate() const;
};

// Collaboratively enriched feature embeddings; row j of v embeds feature j.
struct FeatureEmbeddings {
  DenseMatrix v;  // n_features x k, orthonormal columns
  Vector sigma;
  Index effective_rank = 0;

  Index n_features() const { return v.rows(); }
  Index rank() const { return v.cols(); }
};

// Item-item similarity over the columns of an interaction matrix.
using SimilarityFunction = std::function<DenseMatrix(const SparseMatrix&)>;

// Raw term frequency times smoothed idf: idf(j) = ln((1 + N) / (1 + df(j))) + 1.
SparseMatrix tfidf_weight(const SparseMatrix& features);

// Cosine similarity between item columns. Items without interactions are
// orthogonal to everything and keep a unit diagonal.
DenseMatrix cosine_item_similarity(const SparseMatrix& interactions);

// (1 - alpha) I + alpha * sim
DenseMatrix blend_similarity(const DenseMatrix& sim, double alpha);

// D^p L^T F_w with S = L L^T and D = diag(item_pops). Items with zero
// popularity get a neutral weight of 1.
DenseMatrix inject_collaborative(const SparseMatrix& weighted_features, const DenseMatrix& similarity,
                                 const Vector& item_pops, double p);

FeatureEmbeddings embed_features(const DenseMatrix& saturated, Index k, std::uint64_t seed);

// Full mix step. `interactions` is users x items and `features` items x features;
// both must already be restricted to the items the selector may see.
FeatureEmbeddings mix(const SparseMatrix& interactions, const SparseMatrix& features, const MixParams& params,
                      const SimilarityFunction& similarity = cosine_item_similarity);
FeatureEmbeddings mix(const Dataset& dataset, const MixParams& params);

// Binary layout: "MFEMBED1", then u64 rows, cols, effective_rank, then sigma
// (cols doubles) and v in row-major order, all little-endian.
void write_embeddings_binary(const FeatureEmbeddings& embeddings, const std::filesystem::path& path);
FeatureEmbeddings read_embeddings_binary(const std::filesystem::path& path);
void write_embeddings_csv(const FeatureEmbeddings& embeddings, const std::vector<std::string>& feature_names,
                          const std::filesystem::path& path);

}  // namespace maxfeat
