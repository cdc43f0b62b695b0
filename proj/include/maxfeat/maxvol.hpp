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

struct MaxvolParams {
  double tol = 1.05;   // dominance tolerance, > 1
  Index max_iters = 0;  // 0 means 100 * k
  // The pivoted start is deterministic; the seed only travels with configs.
  std::uint64_t seed = 0;

  void validate() const;
};

struct SquareMaxvol {
  // Rows of the dominant k x k submatrix, in pivoting order.
  std::vector<Index> rows;
  // V * inverse(V[rows]); every entry has magnitude <= tol when converged.
  DenseMatrix coefficients;
  Index swaps = 0;
  bool converged = true;  // false when max_iters ran out (best-so-far result)
};

// Greedy pivoted Gram-Schmidt over the rows of `v`: picks the row with the
// largest residual norm (lowest index on ties) and projects it out, `count`
// times. Throws SingularStart when the residual vanishes early.
std::vector<Index> pivoted_rows(const DenseMatrix& v, Index count);

SquareMaxvol square_maxvol(const DenseMatrix& v, const MaxvolParams& params = {});

// Square phase followed by greedy row additions maximizing the volume gain
// 1 + |c_i|^2, where c_i is the least-squares coefficient vector of row i over
// the rows chosen so far. Scores hold the gain at selection time; square-phase
// rows carry kUnscored.
FeatureRanking rect_maxvol(const DenseMatrix& v, Index n_select, const MaxvolParams& params = {});

// rect_maxvol over the leading effective_rank columns of the embeddings.
FeatureRanking select_features(const FeatureEmbeddings& embeddings, Index n_select,
                               const MaxvolParams& params = {});

}  // namespace maxfeat
