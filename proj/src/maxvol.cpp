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

#include "maxfeat/maxvol.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "maxfeat/errors.hpp"

namespace maxfeat {
namespace {

DenseMatrix gather_rows(const DenseMatrix& v, const std::vector<Index>& rows) {
  DenseMatrix out(static_cast<Index>(rows.size()), v.cols());
  for (std::size_t t = 0; t < rows.size(); ++t) out.row(static_cast<Index>(t)) = v.row(rows[t]);
  return out;
}

// V * inverse(V[rows]) via a transposed solve.
DenseMatrix coefficients_for(const DenseMatrix& v, const std::vector<Index>& rows) {
  const DenseMatrix square = gather_rows(v, rows);
  Eigen::PartialPivLU<DenseMatrix> lu(square.transpose());
  return lu.solve(v.transpose()).transpose();
}

}  // namespace

void MaxvolParams::validate() const {
  if (!(tol > 1.0)) throw Error(ErrorCode::kInvalidArgument, "maxvol tolerance must exceed 1");
  if (max_iters < 0) throw Error(ErrorCode::kInvalidArgument, "max_iters must be nonnegative");
}

std::vector<Index> pivoted_rows(const DenseMatrix& v, Index count) {
  if (count > v.rows() || count > v.cols())
    throw Error(ErrorCode::kShapeMismatch, "cannot pick " + std::to_string(count) + " independent rows from a " +
                                               std::to_string(v.rows()) + "x" + std::to_string(v.cols()) +
                                               " matrix");
  DenseMatrix residual = v;
  Vector norms = residual.rowwise().squaredNorm();
  const double scale = norms.size() > 0 ? norms.maxCoeff() : 0.0;
  std::vector<bool> taken(static_cast<std::size_t>(v.rows()), false);
  std::vector<Index> rows;
  rows.reserve(static_cast<std::size_t>(count));
  for (Index step = 0; step < count; ++step) {
    Index best = -1;
    for (Index i = 0; i < residual.rows(); ++i)
      if (!taken[i] && (best < 0 || norms(i) > norms(best))) best = i;
    if (best < 0 || !(norms(best) > 1e-20 * scale) || !(scale > 0.0))
      throw Error(ErrorCode::kSingularStart, "matrix has fewer than " + std::to_string(count) +
                                                 " linearly independent rows");
    taken[best] = true;
    rows.push_back(best);
    const Vector q = residual.row(best).transpose() / std::sqrt(norms(best));
    residual -= (residual * q) * q.transpose();
    norms = residual.rowwise().squaredNorm();
  }
  return rows;
}

SquareMaxvol square_maxvol(const DenseMatrix& v, const MaxvolParams& params) {
  params.validate();
  const Index k = v.cols();
  if (k < 1 || v.rows() < k)
    throw Error(ErrorCode::kShapeMismatch, "square_maxvol needs a tall matrix, got " + std::to_string(v.rows()) +
                                               "x" + std::to_string(k));
  if (!v.allFinite()) throw Error(ErrorCode::kInvalidArgument, "maxvol input has non-finite entries");

  SquareMaxvol out;
  out.rows = pivoted_rows(v, k);
  DenseMatrix b = coefficients_for(v, out.rows);
  const Index max_iters = params.max_iters > 0 ? params.max_iters : 100 * k;

  out.converged = false;
  for (Index iter = 0; iter <= max_iters; ++iter) {
    Index i = 0, j = 0;
    // Row-major scan so ties resolve to the lowest row index.
    double best = -1.0;
    for (Index r = 0; r < b.rows(); ++r)
      for (Index c = 0; c < k; ++c)
        if (std::abs(b(r, c)) > best) {
          best = std::abs(b(r, c));
          i = r;
          j = c;
        }
    if (best <= params.tol) {
      out.converged = true;
      break;
    }
    if (iter == max_iters) break;
    // Replacing row j of the submatrix with row i multiplies the volume by |b(i, j)|.
    out.rows[j] = i;
    const Vector bj = b.col(j);
    Eigen::RowVectorXd bi = b.row(i);
    bi(j) -= 1.0;
    b.noalias() -= bj * (bi / b(i, j));
    ++out.swaps;
  }

  const std::vector<Index> order = pivoted_rows(gather_rows(v, out.rows), k);
  std::vector<Index> sorted;
  sorted.reserve(order.size());
  for (Index t : order) sorted.push_back(out.rows[t]);
  out.rows = std::move(sorted);
  out.coefficients = coefficients_for(v, out.rows);
  return out;
}

FeatureRanking rect_maxvol(const DenseMatrix& v, Index n_select, const MaxvolParams& params) {
  const Index n = v.rows();
  const Index k = v.cols();
  if (n_select < k || n_select > n)
    throw Error(ErrorCode::kNSelectOutOfRange, "n_select " + std::to_string(n_select) + " outside [" +
                                                   std::to_string(k) + ", " + std::to_string(n) + "]");
  SquareMaxvol square = square_maxvol(v, params);

  FeatureRanking ranking;
  ranking.method = SelectionMethod::kMaxvol;
  ranking.n_features = n;
  ranking.converged = square.converged;
  ranking.order = square.rows;
  ranking.scores.assign(square.rows.size(), kUnscored);
  ranking.order.reserve(static_cast<std::size_t>(n_select));
  ranking.scores.reserve(static_cast<std::size_t>(n_select));

  std::vector<bool> selected(static_cast<std::size_t>(n), false);
  for (Index r : square.rows) selected[r] = true;

  const Index extra = n_select - k;
  DenseMatrix coef(n, k + extra);
  coef.leftCols(k) = square.coefficients;
  Index width = k;
  Vector gain = coef.leftCols(k).rowwise().squaredNorm();

  for (Index step = 0; step < extra; ++step) {
    Index best = -1;
    for (Index i = 0; i < n; ++i)
      if (!selected[i] && (best < 0 || gain(i) > gain(best))) best = i;
    selected[best] = true;
    ranking.order.push_back(best);
    ranking.scores.push_back(1.0 + gain(best));

    // Rank-one update of the least-squares coefficients after appending row `best`.
    const Eigen::RowVectorXd c = coef.row(best).head(width);
    const Vector proj = coef.leftCols(width) * c.transpose();
    const double l = 1.0 / (1.0 + proj(best));
    coef.leftCols(width).noalias() -= l * proj * c;
    coef.col(width) = l * proj;
    ++width;
    gain -= l * proj.cwiseProduct(proj);
  }
  return ranking;
}

FeatureRanking select_features(const FeatureEmbeddings& embeddings, Index n_select, const MaxvolParams& params) {
  const Index k = embeddings.rank();
  if (n_select < k || n_select > embeddings.n_features())
    throw Error(ErrorCode::kNSelectOutOfRange, "n_select " + std::to_string(n_select) + " outside [" +
                                                   std::to_string(k) + ", " +
                                                   std::to_string(embeddings.n_features()) + "]");
  const Index r = std::clamp<Index>(embeddings.effective_rank, 0, k);
  if (r == 0) throw Error(ErrorCode::kSingularStart, "embeddings have zero effective rank");
  FeatureRanking ranking = rect_maxvol(embeddings.v.leftCols(r), n_select, params);
  ranking.method = SelectionMethod::kMaxvol;
  return ranking;
}

}  // namespace maxfeat
