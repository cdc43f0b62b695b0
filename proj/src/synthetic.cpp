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

#include "maxfeat/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "maxfeat/errors.hpp"

namespace maxfeat {
namespace {

// Weighted sample of `count` distinct indices from `weights` (rejection on repeats).
std::vector<Index> sample_distinct(std::mt19937_64& rng, const std::vector<double>& weights, Index count) {
  std::vector<Index> out;
  std::vector<bool> used(weights.size(), false);
  std::vector<double> w = weights;
  for (Index t = 0; t < count; ++t) {
    std::discrete_distribution<Index> pick(w.begin(), w.end());
    const Index i = pick(rng);
    out.push_back(i);
    used[i] = true;
    w[i] = 0.0;
  }
  return out;
}

}  // namespace

void PlantedParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kInvalidArgument, std::string("planted generator: ") + what);
  };
  require(n_items > 0 && n_users > 0, "need items and users");
  require(n_planted > 0 && n_planted < n_features, "planted features must be a proper subset");
  require(planted_per_item >= 1 && planted_per_item <= n_planted, "planted_per_item out of range");
  require(noise_per_item >= 0 && noise_per_item <= n_features - n_planted, "noise_per_item out of range");
  require(likes_per_user >= 1 && likes_per_user <= n_planted, "likes_per_user out of range");
  require(interactions_per_user >= 1, "interactions_per_user must be positive");
  require(noise_skew >= 0.0, "noise_skew must be nonnegative");
}

PlantedDataset generate_planted(const PlantedParams& params) {
  params.validate();
  std::mt19937_64 rng(params.seed);

  std::vector<Index> perm(static_cast<std::size_t>(params.n_features));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Index> planted(perm.begin(), perm.begin() + params.n_planted);
  std::vector<Index> noise(perm.begin() + params.n_planted, perm.end());

  std::vector<double> noise_weights(noise.size());
  for (std::size_t r = 0; r < noise.size(); ++r)
    noise_weights[r] = 1.0 / std::pow(static_cast<double>(r + 1), params.noise_skew);
  const std::vector<double> planted_weights(planted.size(), 1.0);

  std::vector<Triplet> feature_entries;
  std::vector<std::vector<Index>> items_by_planted(planted.size());
  for (Index i = 0; i < params.n_items; ++i) {
    for (Index slot : sample_distinct(rng, planted_weights, params.planted_per_item)) {
      feature_entries.emplace_back(i, planted[slot], 1.0);
      items_by_planted[slot].push_back(i);
    }
    for (Index slot : sample_distinct(rng, noise_weights, params.noise_per_item))
      feature_entries.emplace_back(i, noise[slot], 1.0);
  }

  std::vector<Triplet> interactions;
  std::vector<double> affinity(static_cast<std::size_t>(params.n_items));
  for (Index u = 0; u < params.n_users; ++u) {
    std::fill(affinity.begin(), affinity.end(), 0.0);
    for (Index slot : sample_distinct(rng, planted_weights, params.likes_per_user))
      for (Index i : items_by_planted[slot]) affinity[i] += 1.0;
    const auto candidates = std::count_if(affinity.begin(), affinity.end(), [](double a) { return a > 0.0; });
    const Index take = std::min<Index>(params.interactions_per_user, candidates);
    for (Index i : sample_distinct(rng, affinity, take)) interactions.emplace_back(u, i, 1.0);
  }

  PlantedDataset out;
  Dataset& d = out.dataset;
  d.interactions.resize(params.n_users, params.n_items);
  d.interactions.setFromTriplets(interactions.begin(), interactions.end());
  d.interactions.makeCompressed();
  d.features.resize(params.n_items, params.n_features);
  d.features.setFromTriplets(feature_entries.begin(), feature_entries.end());
  d.features.makeCompressed();
  for (Index u = 0; u < params.n_users; ++u) d.user_ids.push_back("u" + std::to_string(u));
  for (Index i = 0; i < params.n_items; ++i) d.item_ids.push_back("i" + std::to_string(i));
  d.feature_categories.assign(static_cast<std::size_t>(params.n_features), "noise");
  for (Index j = 0; j < params.n_features; ++j) d.feature_names.push_back("f" + std::to_string(j));
  for (Index j : planted) d.feature_categories[j] = "planted";
  out.planted = planted;
  std::sort(out.planted.begin(), out.planted.end());
  return out;
}

}  // namespace maxfeat
