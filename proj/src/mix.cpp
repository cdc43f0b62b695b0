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

#include "maxfeat/mix.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>

#include "maxfeat/errors.hpp"

namespace maxfeat {
namespace {

constexpr char kEmbeddingMagic[8] = {'M', 'F', 'E', 'M', 'B', 'E', 'D', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw Error(ErrorCode::kParseError, "truncated embeddings file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void MixParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw Error(ErrorCode::kAlphaOutOfRange, "alpha must lie in [0, 1], got " + std::to_string(alpha));
  if (!std::isfinite(p)) throw Error(ErrorCode::kInvalidArgument, "popularity exponent must be finite");
  if (k < 1) throw Error(ErrorCode::kRankTooLarge, "embedding rank must be >= 1");
}

SparseMatrix tfidf_weight(const SparseMatrix& features) {
  if (features.rows() == 0 || features.cols() == 0)
    throw Error(ErrorCode::kEmptyFeatureSpace, "tfidf_weight of an empty feature matrix");
  const double n_items = static_cast<double>(features.rows());
  Vector df = Vector::Zero(features.cols());
  for (Index r = 0; r < features.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(features, r); it; ++it) {
      if (it.value() < 0.0) throw Error(ErrorCode::kInvalidArgument, "feature matrix must be nonnegative");
      if (it.value() > 0.0) df(it.col()) += 1.0;
    }
  Vector idf = ((1.0 + n_items) / (1.0 + df.array())).log() + 1.0;
  SparseMatrix out = features;
  for (Index r = 0; r < out.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(out, r); it; ++it) it.valueRef() *= idf(it.col());
  out.makeCompressed();
  return out;
}

DenseMatrix cosine_item_similarity(const SparseMatrix& interactions) {
  const Index n = interactions.cols();
  const SparseMatrix gram_sparse = SparseMatrix(interactions.transpose()) * interactions;
  DenseMatrix sim = DenseMatrix(gram_sparse);
  Vector norms = sim.diagonal().cwiseMax(0.0).cwiseSqrt();
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      const double denom = norms(i) * norms(j);
      sim(i, j) = denom > 0.0 ? sim(i, j) / denom : 0.0;
    }
  // Exact symmetry and unit diagonal regardless of rounding.
  sim = 0.5 * (sim + sim.transpose()).eval();
  sim.diagonal().setOnes();
  return sim;
}

DenseMatrix blend_similarity(const DenseMatrix& sim, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw Error(ErrorCode::kAlphaOutOfRange, "alpha must lie in [0, 1], got " + std::to_string(alpha));
  if (sim.rows() != sim.cols()) throw Error(ErrorCode::kShapeMismatch, "similarity matrix must be square");
  DenseMatrix s = alpha * sim;
  s.diagonal().array() += 1.0 - alpha;
  return s;
}

DenseMatrix inject_collaborative(const SparseMatrix& weighted_features, const DenseMatrix& similarity,
                                 const Vector& item_pops, double p) {
  const Index n = weighted_features.rows();
  if (similarity.rows() != n || item_pops.size() != n)
    throw Error(ErrorCode::kShapeMismatch, "similarity, popularity and feature rows disagree");
  const CholeskyFactor factor = cholesky(similarity);
  DenseMatrix saturated = factor.lower.transpose() * weighted_features;
  for (Index i = 0; i < n; ++i) {
    const double d = item_pops(i) > 0.0 ? item_pops(i) : 1.0;
    saturated.row(i) *= std::pow(d, p);
  }
  return saturated;
}

FeatureEmbeddings embed_features(const DenseMatrix& saturated, Index k, std::uint64_t seed) {
  const Index n_features = saturated.cols();
  if (k < 1 || k >= n_features || k > std::min(saturated.rows(), n_features))
    throw Error(ErrorCode::kRankTooLarge, "embedding rank " + std::to_string(k) + " needs k < " +
                                              std::to_string(n_features) + " features and k <= " +
                                              std::to_string(saturated.rows()) + " items");
  TruncatedSvd svd = truncated_svd(saturated, k, seed);
  FeatureEmbeddings out;
  out.v = std::move(svd.v);
  out.sigma = std::move(svd.sigma);
  out.effective_rank = svd.effective_rank;
  return out;
}

FeatureEmbeddings mix(const SparseMatrix& interactions, const SparseMatrix& features, const MixParams& params,
                      const SimilarityFunction& similarity) {
  params.validate();
  if (interactions.cols() != features.rows())
    throw Error(ErrorCode::kShapeMismatch, "interaction columns and feature rows disagree");
  const SparseMatrix weighted = tfidf_weight(features);
  DenseMatrix s;
  if (params.alpha == 0.0) {
    s = DenseMatrix::Identity(features.rows(), features.rows());
  } else {
    s = blend_similarity(similarity(interactions), params.alpha);
  }
  const DenseMatrix saturated = inject_collaborative(weighted, s, column_sums(interactions), params.p);
  return embed_features(saturated, params.k, params.seed);
}

FeatureEmbeddings mix(const Dataset& dataset, const MixParams& params) {
  return mix(dataset.interaction_view(), dataset.features, params);
}

void write_embeddings_binary(const FeatureEmbeddings& embeddings, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(kEmbeddingMagic, sizeof(kEmbeddingMagic));
  put_u64(out, static_cast<std::uint64_t>(embeddings.v.rows()));
  put_u64(out, static_cast<std::uint64_t>(embeddings.v.cols()));
  put_u64(out, static_cast<std::uint64_t>(embeddings.effective_rank));
  for (Index j = 0; j < embeddings.sigma.size(); ++j) put_f64(out, embeddings.sigma(j));
  for (Index i = 0; i < embeddings.v.rows(); ++i)
    for (Index j = 0; j < embeddings.v.cols(); ++j) put_f64(out, embeddings.v(i, j));
  if (!out) throw Error(ErrorCode::kIoError, "failed writing " + path.string());
}

FeatureEmbeddings read_embeddings_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kEmbeddingMagic, 8) != 0)
    throw Error(ErrorCode::kParseError, path.string() + " is not an embeddings file");
  const auto rows = static_cast<Index>(get_u64(in));
  const auto cols = static_cast<Index>(get_u64(in));
  FeatureEmbeddings out;
  out.effective_rank = static_cast<Index>(get_u64(in));
  if (rows < 0 || cols < 0 || out.effective_rank > cols) throw Error(ErrorCode::kParseError, "bad embedding dims");
  out.sigma.resize(cols);
  for (Index j = 0; j < cols; ++j) out.sigma(j) = get_f64(in);
  out.v.resize(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) out.v(i, j) = get_f64(in);
  return out;
}

void write_embeddings_csv(const FeatureEmbeddings& embeddings, const std::vector<std::string>& feature_names,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << "feature";
  for (Index j = 0; j < embeddings.v.cols(); ++j) out << ",v" << j;
  out << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Index i = 0; i < embeddings.v.rows(); ++i) {
    out << (static_cast<std::size_t>(i) < feature_names.size() ? feature_names[i] : std::to_string(i));
    for (Index j = 0; j < embeddings.v.cols(); ++j) out << ',' << embeddings.v(i, j);
    out << '\n';
  }
}

}  // namespace maxfeat
