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

#include "maxfeat/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "maxfeat/errors.hpp"

namespace maxfeat {
namespace {

constexpr double kSymmetryTolerance = 1e-10;
constexpr int kMaxEscalations = 3;

bool try_factor(const DenseMatrix& s, double shift, DenseMatrix& out) {
  DenseMatrix shifted = s;
  shifted.diagonal().array() += shift;
  Eigen::LLT<DenseMatrix> llt(shifted);
  if (llt.info() != Eigen::Success) return false;
  out = llt.matrixL();
  return out.allFinite() && (out.diagonal().array() > 0.0).all();
}

DenseMatrix orthonormalize(const DenseMatrix& m) {
  Eigen::HouseholderQR<DenseMatrix> qr(m);
  return qr.householderQ() * DenseMatrix::Identity(m.rows(), m.cols());
}

void normalize_signs(DenseMatrix& u, DenseMatrix& v) {
  for (Index j = 0; j < v.cols(); ++j) {
    Index arg = 0;
    v.col(j).cwiseAbs().maxCoeff(&arg);
    if (v(arg, j) < 0.0) {
      v.col(j) *= -1.0;
      u.col(j) *= -1.0;
    }
  }
}

TruncatedSvd exact_svd(const DenseMatrix& a, Index k) {
  Eigen::BDCSVD<DenseMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  TruncatedSvd out;
  out.u = svd.matrixU().leftCols(k);
  out.sigma = svd.singularValues().head(k);
  out.v = svd.matrixV().leftCols(k);
  return out;
}

TruncatedSvd randomized_svd(const DenseMatrix& a, Index k, std::uint64_t seed,
                            const SvdOptions& options) {
  const Index sketch = std::min(k + options.oversampling, std::min(a.rows(), a.cols()));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseMatrix omega(a.cols(), sketch);
  for (Index j = 0; j < omega.cols(); ++j)
    for (Index i = 0; i < omega.rows(); ++i) omega(i, j) = normal(rng);

  DenseMatrix q = orthonormalize(a * omega);
  for (int it = 0; it < options.power_iterations; ++it) {
    DenseMatrix z = orthonormalize(a.transpose() * q);
    q = orthonormalize(a * z);
  }
  DenseMatrix small = q.transpose() * a;
  Eigen::BDCSVD<DenseMatrix> svd(small, Eigen::ComputeThinU | Eigen::ComputeThinV);
  TruncatedSvd out;
  out.u = q * svd.matrixU().leftCols(k);
  out.sigma = svd.singularValues().head(k);
  out.v = svd.matrixV().leftCols(k);
  return out;
}

}  // namespace

CholeskyFactor cholesky(const DenseMatrix& s, double jitter) {
  if (s.rows() != s.cols())
    throw Error(ErrorCode::kShapeMismatch, "cholesky expects a square matrix, got " +
                                               std::to_string(s.rows()) + "x" +
                                               std::to_string(s.cols()));
  if (jitter < 0.0 || !std::isfinite(jitter))
    throw Error(ErrorCode::kInvalidArgument, "jitter must be a finite nonnegative number");
  if (!s.allFinite()) throw Error(ErrorCode::kNotPositiveDefinite, "matrix has non-finite entries");
  const Index n = s.rows();
  if (n == 0) return {};

  const double scale = std::max(s.cwiseAbs().maxCoeff(), 1e-300);
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale)
    throw Error(ErrorCode::kNotSymmetric, "cholesky input is not symmetric");

  CholeskyFactor out;
  if (try_factor(s, jitter, out.lower)) {
    out.jitter = jitter;
    return out;
  }
  double step = 1e-10 * s.trace() / static_cast<double>(n);
  if (!(step > 0.0)) step = 1e-10;
  for (int e = 0; e <= kMaxEscalations; ++e) {
    const double shift = jitter + step;
    if (try_factor(s, shift, out.lower)) {
      out.jitter = shift;
      out.escalations = e;
      return out;
    }
    step *= 10.0;
  }
  throw Error(ErrorCode::kNotPositiveDefinite,
              "factorization failed after jitter escalation up to " + std::to_string(jitter + step / 10.0));
}

TruncatedSvd truncated_svd(const DenseMatrix& a, Index k, std::uint64_t seed,
                           const SvdOptions& options) {
  if (a.rows() == 0 || a.cols() == 0) throw Error(ErrorCode::kEmptyMatrix, "truncated_svd of an empty matrix");
  const Index max_rank = std::min(a.rows(), a.cols());
  if (k < 1 || k > max_rank)
    throw Error(ErrorCode::kRankTooLarge, "rank " + std::to_string(k) + " outside [1, " +
                                              std::to_string(max_rank) + "]");
  if (!a.allFinite()) throw Error(ErrorCode::kInvalidArgument, "truncated_svd input has non-finite entries");

  const bool exact = options.method == SvdMethod::kExact ||
                     (options.method == SvdMethod::kAuto && max_rank <= options.exact_threshold);
  TruncatedSvd out = exact ? exact_svd(a, k) : randomized_svd(a, k, seed, options);

  const double top = out.sigma(0);
  out.effective_rank = 0;
  for (Index i = 0; i < k; ++i) {
    if (top > 0.0 && out.sigma(i) > kRankTolerance * top) {
      ++out.effective_rank;
    } else {
      out.sigma(i) = 0.0;
    }
  }
  out.rank_deficient = out.effective_rank < k;
  normalize_signs(out.u, out.v);
  return out;
}

double volume(const DenseMatrix& b) {
  if (b.rows() < b.cols())
    throw Error(ErrorCode::kShapeMismatch, "volume needs rows >= cols, got " + std::to_string(b.rows()) +
                                               "x" + std::to_string(b.cols()));
  if (b.cols() == 0) return 1.0;
  Eigen::HouseholderQR<DenseMatrix> qr(b);
  const auto& r = qr.matrixQR();
  double vol = 1.0;
  for (Index i = 0; i < b.cols(); ++i) vol *= std::abs(r(i, i));
  return vol;
}

SparseMatrix to_sparse(const DenseMatrix& dense) {
  SparseMatrix out = dense.sparseView();
  out.makeCompressed();
  return out;
}

Vector column_sums(const SparseMatrix& m) {
  Vector sums = Vector::Zero(m.cols());
  for (Index r = 0; r < m.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) sums(it.col()) += it.value();
  return sums;
}

}  // namespace maxfeat
