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

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace maxfeat {

using Index = Eigen::Index;
using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
// Compressed row storage; after makeCompressed() column indices are strictly
// increasing within each row and free of duplicates.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

struct CholeskyFactor {
  DenseMatrix lower;
  // Diagonal shift actually added: the factor satisfies lower * lower^T = S + jitter * I.
  double jitter = 0.0;
  int escalations = 0;
};

// Factors a symmetric matrix, escalating a diagonal jitter when the plain
// factorization breaks down. The automatic schedule starts at
// 1e-10 * trace(S) / N and grows tenfold, at most three times.
CholeskyFactor cholesky(const DenseMatrix& s, double jitter = 0.0);

enum class SvdMethod { kAuto, kExact, kRandomized };

struct SvdOptions {
  SvdMethod method = SvdMethod::kAuto;
  Index oversampling = 10;
  int power_iterations = 4;
  // kAuto uses the exact dense decomposition when min(rows, cols) is at most this.
  Index exact_threshold = 512;
};

struct TruncatedSvd {
  DenseMatrix u;  // rows x k, orthonormal columns
  Vector sigma;   // length k, nonincreasing; trailing zeros when rank < k
  DenseMatrix v;  // cols x k, orthonormal columns
  Index effective_rank = 0;
  bool rank_deficient = false;
};

// Rank-k SVD. Singular vectors are sign-normalized so the largest-magnitude
// entry of every column of v is positive, which makes the output a
// deterministic function of (a, k, seed).
TruncatedSvd truncated_svd(const DenseMatrix& a, Index k, std::uint64_t seed,
                           const SvdOptions& options = {});

// sqrt(det(B^T B)) for a tall or square B, computed from the R factor of a
// Householder QR.
double volume(const DenseMatrix& b);

// Relative threshold below which a singular value counts as zero.
inline constexpr double kRankTolerance = 1e-12;

SparseMatrix to_sparse(const DenseMatrix& dense);
Vector column_sums(const SparseMatrix& m);

}  // namespace maxfeat
