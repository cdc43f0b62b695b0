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

#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "maxfeat/baselines.hpp"
#include "maxfeat/errors.hpp"
#include "maxfeat/maxvol.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace maxfeat;
using testutil::code_of;

namespace {

SparseMatrix sparse(const DenseMatrix& d) { return to_sparse(d); }

DenseMatrix dense(Index rows, Index cols, std::initializer_list<double> values) {
  DenseMatrix d(rows, cols);
  auto it = values.begin();
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) d(i, j) = *it++;
  return d;
}

bool is_prefix_nested(const FeatureRanking& r) {
  for (Index n = 1; n < r.size(); ++n) {
    auto small = r.prefix(n), big = r.prefix(n + 1);
    std::sort(small.begin(), small.end());
    std::sort(big.begin(), big.end());
    if (!std::includes(big.begin(), big.end(), small.begin(), small.end())) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("random selector") {
  TEST_CASE("exhaustion gives a permutation") {
    auto r = select_random(9, 9, 4);
    std::vector<Index> order = r.order;
    std::sort(order.begin(), order.end());
    CHECK(order == identity_ranking(9).order);
    CHECK(r.method == SelectionMethod::kRandom);
  }

  TEST_CASE("deterministic per seed") {
    CHECK(select_random(50, 10, 7).order == select_random(50, 10, 7).order);
    CHECK(select_random(50, 10, 7).order != select_random(50, 10, 8).order);
  }

  TEST_CASE("uniform over single draws") {
    std::array<int, 4> counts{};
    for (std::uint64_t seed = 0; seed < 10000; ++seed) ++counts[select_random(4, 1, seed).order[0]];
    for (int c : counts) CHECK(std::abs(c / 10000.0 - 0.25) <= 0.02);
  }

  TEST_CASE("out of range") {
    CHECK(code_of([] { select_random(3, 4, 0); }) == ErrorCode::kNSelectOutOfRange);
  }
}

TEST_SUITE("popular selector") {
  TEST_CASE("hand evaluation") {
    const SparseMatrix r = sparse(dense(2, 3, {1, 1, 0, 0, 1, 0}));
    const SparseMatrix f = sparse(DenseMatrix::Identity(3, 3));
    const auto ranking = select_popular(r, f, 3);
    CHECK(ranking.order == std::vector<Index>{1, 0, 2});
    CHECK(ranking.scores == std::vector<double>{2, 1, 0});
    CHECK(select_popular(SparseMatrix(3.0 * r), f, 3).order == ranking.order);
  }

  TEST_CASE("no interactions") {
    const auto ranking = select_popular(SparseMatrix(4, 3), sparse(DenseMatrix::Identity(3, 3)), 3);
    CHECK(ranking.order == std::vector<Index>{0, 1, 2});
  }

  TEST_CASE("shape mismatch") {
    CHECK(code_of([] { select_popular(SparseMatrix(2, 3), SparseMatrix(4, 2), 1); }) == ErrorCode::kShapeMismatch);
  }
}

TEST_SUITE("row normalization") {
  TEST_CASE("fixtures") {
    const DenseMatrix out = normalize_feature_rows(sparse(dense(3, 2, {3, 4, 0, 0, 1, 0})));
    CHECK(out(0, 0) == doctest::Approx(0.6));
    CHECK(out(0, 1) == doctest::Approx(0.8));
    CHECK(out.row(1).isZero());
    CHECK((DenseMatrix(normalize_feature_rows(sparse(out))) - out).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_SUITE("cfecbf") {
  TEST_CASE("identity features recover unit weights") {
    CfecbfParams params;
    params.learning_rate = 0.2;
    params.epochs = 200;
    const auto result = train_cfecbf(DenseMatrix::Identity(6, 6), sparse(DenseMatrix::Identity(6, 6)), params);
    CHECK((result.weights - Vector::Ones(6)).cwiseAbs().maxCoeff() <= 1e-4);
  }

  TEST_CASE("ridge pulls weights to zero") {
    CfecbfParams params;
    params.lambda2 = 1.0;
    params.learning_rate = 0.1;
    params.epochs = 500;
    const auto result = train_cfecbf(DenseMatrix::Zero(5, 5), sparse(DenseMatrix::Identity(5, 5)), params);
    CHECK(result.weights.cwiseAbs().maxCoeff() <= 1e-6);
  }

  TEST_CASE("small random instance beats fixed candidates") {
    std::mt19937_64 rng(5);
    std::bernoulli_distribution on(0.4);
    DenseMatrix f = DenseMatrix::Zero(8, 5);
    for (Index i = 0; i < 8; ++i) {
      for (Index j = 0; j < 5; ++j) f(i, j) = on(rng) ? 1.0 : 0.0;
      f(i, i % 5) = 1.0;
    }
    DenseMatrix r = DenseMatrix::Zero(12, 8);
    for (Index u = 0; u < 12; ++u)
      for (Index i = 0; i < 8; ++i) r(u, i) = on(rng) ? 1.0 : 0.0;
    DenseMatrix s_cf = oracle::random_matrix(8, 8, 6);
    s_cf = 0.5 * (s_cf + s_cf.transpose()).eval();
    CfecbfParams params;
    params.lambda1 = 0.01;
    params.lambda2 = 0.01;
    params.epochs = 100;
    const auto result = train_cfecbf(s_cf, sparse(f), params);
    const SparseMatrix fn = normalize_feature_rows(sparse(f));
    const double final_loss = cfecbf_loss(s_cf, fn, result.weights, params);
    CHECK(final_loss <= cfecbf_loss(s_cf, fn, Vector::Zero(5), params));
    CHECK(final_loss <= cfecbf_loss(s_cf, fn, Vector::Ones(5), params));
    for (std::size_t e = 1; e < result.loss_history.size(); ++e)
      CHECK(result.loss_history[e] <= result.loss_history[e - 1] + 1e-9);
    CHECK(result.ranking.method == SelectionMethod::kCfecbf);
    CHECK(is_prefix_nested(result.ranking));
  }

  TEST_CASE("gradient matches finite differences") {
    const DenseMatrix s_cf = oracle::random_matrix(6, 6, 2);
    const SparseMatrix fn = normalize_feature_rows(sparse(oracle::random_matrix(6, 4, 3).cwiseAbs()));
    CfecbfParams params;
    params.lambda2 = 0.3;
    const Vector w = Vector::LinSpaced(4, 0.5, 2.0);
    const Vector grad = cfecbf_gradient(s_cf, fn, w, params);
    for (Index j = 0; j < 4; ++j) {
      Vector plus = w, minus = w;
      plus(j) += 1e-6;
      minus(j) -= 1e-6;
      const double fd = (cfecbf_loss(s_cf, fn, plus, params) - cfecbf_loss(s_cf, fn, minus, params)) / 2e-6;
      CHECK(grad(j) == doctest::Approx(fd).epsilon(1e-5));
    }
  }

  TEST_CASE("stationary at the diagonal for identity features") {
    Vector d(4);
    d << 0.3, 1.2, 0.7, 2.0;
    DenseMatrix s_cf = oracle::random_matrix(4, 4, 8);
    s_cf.diagonal() = d;
    const Vector grad = cfecbf_gradient(s_cf, sparse(DenseMatrix::Identity(4, 4)), d, CfecbfParams{});
    CHECK(grad.cwiseAbs().maxCoeff() <= 1e-8);
  }

  TEST_CASE("divergence is reported") {
    CfecbfParams params;
    params.learning_rate = 1e300;
    CHECK(code_of([&] {
            train_cfecbf(100.0 * DenseMatrix::Ones(3, 3), sparse(DenseMatrix::Ones(3, 2)), params);
          }) == ErrorCode::kNonFiniteLoss);
  }

  TEST_CASE("parameter validation and shapes") {
    CfecbfParams params;
    params.epochs = 0;
    CHECK(code_of([&] { params.validate(); }) == ErrorCode::kInvalidArgument);
    CHECK(code_of([] { train_cfecbf(DenseMatrix::Identity(3, 3), SparseMatrix(4, 2), CfecbfParams{}); }) ==
          ErrorCode::kShapeMismatch);
  }
}

TEST_SUITE("norm selector") {
  TEST_CASE("hand norms") {
    FeatureEmbeddings emb;
    emb.v = dense(3, 2, {3, 0, 0, 1, 2, 2});
    emb.sigma = Vector::Ones(2);
    emb.effective_rank = 2;
    CHECK(select_by_norm(emb, 3).order == std::vector<Index>{0, 2, 1});
    emb.v *= 2.0;
    CHECK(select_by_norm(emb, 3).order == std::vector<Index>{0, 2, 1});
    emb.v = DenseMatrix::Ones(3, 2);
    CHECK(select_by_norm(emb, 3).order == std::vector<Index>{0, 1, 2});
    CHECK(code_of([&] { select_by_norm(emb, 4); }) == ErrorCode::kNSelectOutOfRange);
  }
}

TEST_SUITE("ranking prefixes") {
  TEST_CASE("nested for every selector") {
    const DenseMatrix v = oracle::random_matrix(20, 3, 4);
    FeatureEmbeddings emb{v, Vector::Ones(3), 3};
    CHECK(is_prefix_nested(select_random(20, 20, 1)));
    CHECK(is_prefix_nested(select_by_norm(emb, 20)));
    CHECK(is_prefix_nested(rect_maxvol(v, 20)));
    CHECK(is_prefix_nested(select_popular(sparse(oracle::random_matrix(5, 20, 1).cwiseAbs()),
                                          sparse(DenseMatrix::Identity(20, 20)), 20)));
  }
}
