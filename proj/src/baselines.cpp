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

#include "maxfeat/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "maxfeat/errors.hpp"

namespace maxfeat {
namespace {

void check_n_select(Index n_select, Index n_features) {
  if (n_select < 0 || n_select > n_features)
    throw Error(ErrorCode::kNSelectOutOfRange, "n_select " + std::to_string(n_select) + " outside [0, " +
                                                   std::to_string(n_features) + "]");
}

FeatureRanking ranking_from_scores(SelectionMethod method, const Vector& scores, Index n_select) {
  FeatureRanking r;
  r.method = method;
  r.n_features = scores.size();
  r.order = argsort_descending(scores);
  r.order.resize(static_cast<std::size_t>(n_select));
  for (Index j : r.order) r.scores.push_back(scores(j));
  return r;
}

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

}  // namespace

void CfecbfParams::validate() const {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0))
    throw Error(ErrorCode::kInvalidArgument, "cfecbf regularization weights must be nonnegative");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kInvalidArgument, "cfecbf learning rate must be positive");
  if (epochs < 1) throw Error(ErrorCode::kInvalidArgument, "cfecbf needs at least one epoch");
}

std::vector<Index> argsort_descending(const Vector& values) {
  std::vector<Index> idx(static_cast<std::size_t>(values.size()));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return values(a) > values(b); });
  return idx;
}

FeatureRanking select_random(Index n_features, Index n_select, std::uint64_t seed) {
  check_n_select(n_select, n_features);
  std::vector<Index> pool(static_cast<std::size_t>(n_features));
  std::iota(pool.begin(), pool.end(), Index{0});
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates.
  for (Index t = 0; t < n_select; ++t) {
    std::uniform_int_distribution<Index> pick(t, n_features - 1);
    std::swap(pool[t], pool[pick(rng)]);
  }
  FeatureRanking r;
  r.method = SelectionMethod::kRandom;
  r.n_features = n_features;
  r.order.assign(pool.begin(), pool.begin() + n_select);
  return r;
}

FeatureRanking select_popular(const SparseMatrix& interactions, const SparseMatrix& features, Index n_select) {
  if (interactions.cols() != features.rows())
    throw Error(ErrorCode::kShapeMismatch, "interaction columns and feature rows disagree");
  check_n_select(n_select, features.cols());
  const Vector pop = column_sums(interactions);
  const Vector w = SparseMatrix(features.transpose()) * pop;
  return ranking_from_scores(SelectionMethod::kPopular, w, n_select);
}

SparseMatrix normalize_feature_rows(const SparseMatrix& features) {
  SparseMatrix out = features;
  for (Index r = 0; r < out.outerSize(); ++r) {
    double sq = 0.0;
    for (SparseMatrix::InnerIterator it(out, r); it; ++it) sq += it.value() * it.value();
    if (sq <= 0.0) continue;
    const double inv = 1.0 / std::sqrt(sq);
    for (SparseMatrix::InnerIterator it(out, r); it; ++it) it.valueRef() *= inv;
  }
  out.makeCompressed();
  return out;
}

namespace {

DenseMatrix residual(const DenseMatrix& collaborative, const SparseMatrix& fn, const Vector& w) {
  const SparseMatrix weighted = fn * w.asDiagonal();
  const SparseMatrix content = weighted * SparseMatrix(fn.transpose());
  return collaborative - DenseMatrix(content);
}

}  // namespace

double cfecbf_loss(const DenseMatrix& collaborative, const SparseMatrix& fn, const Vector& w,
                   const CfecbfParams& params) {
  const DenseMatrix e = residual(collaborative, fn, w);
  return e.squaredNorm() + params.lambda1 * w.lpNorm<1>() + params.lambda2 * w.squaredNorm();
}

Vector cfecbf_gradient(const DenseMatrix& collaborative, const SparseMatrix& fn, const Vector& w,
                       const CfecbfParams& params) {
  const DenseMatrix e = residual(collaborative, fn, w);
  const DenseMatrix ef = e * fn;
  Vector grad = Vector::Zero(fn.cols());
  for (Index r = 0; r < fn.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(fn, r); it; ++it) grad(it.col()) += it.value() * ef(r, it.col());
  return -2.0 * grad + 2.0 * params.lambda2 * w;
}

CfecbfResult train_cfecbf(const DenseMatrix& collaborative, const SparseMatrix& features, const CfecbfParams& params) {
  params.validate();
  const Index n = features.rows();
  if (collaborative.rows() != n || collaborative.cols() != n)
    throw Error(ErrorCode::kShapeMismatch, "collaborative similarity must be items x items");
  const SparseMatrix fn = normalize_feature_rows(features);

  CfecbfResult out;
  Vector w = Vector::Ones(features.cols());
  double loss = cfecbf_loss(collaborative, fn, w, params);
  if (!std::isfinite(loss)) throw Error(ErrorCode::kNonFiniteLoss, "initial cfecbf loss is not finite");
  out.loss_history.push_back(loss);

  for (Index epoch = 0; epoch < params.epochs; ++epoch) {
    const Vector grad = cfecbf_gradient(collaborative, fn, w, params);
    double step = params.learning_rate;
    bool accepted = false;
    for (int halving = 0; halving < 40 && !accepted; ++halving, step *= 0.5) {
      Vector candidate = w - step * grad;
      for (Index j = 0; j < candidate.size(); ++j)
        candidate(j) = soft_threshold(candidate(j), step * params.lambda1);
      const double next = cfecbf_loss(collaborative, fn, candidate, params);
      if (!std::isfinite(next))
        throw Error(ErrorCode::kNonFiniteLoss,
                    "cfecbf loss diverged at epoch " + std::to_string(epoch) + "; lower the learning rate");
      if (next <= loss) {
        w = std::move(candidate);
        loss = next;
        accepted = true;
      }
    }
    out.loss_history.push_back(loss);
    if (!accepted) break;
  }

  out.weights = w;
  out.ranking = ranking_from_scores(SelectionMethod::kCfecbf, w, features.cols());
  return out;
}

FeatureRanking cfecbf_weights(const DenseMatrix& collaborative, const SparseMatrix& features,
                              const CfecbfParams& params) {
  return train_cfecbf(collaborative, features, params).ranking;
}

FeatureRanking select_by_norm(const FeatureEmbeddings& embeddings, Index n_select) {
  check_n_select(n_select, embeddings.n_features());
  const Vector norms = embeddings.v.rowwise().norm();
  return ranking_from_scores(SelectionMethod::kNorm, norms, n_select);
}

}  // namespace maxfeat
