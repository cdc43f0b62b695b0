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
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "maxfeat/linalg.hpp"

namespace maxfeat {

enum class SelectionMethod { kMaxvol, kRandom, kPopular, kCfecbf, kNorm, kAll };

std::string_view method_name(SelectionMethod method);
std::optional<SelectionMethod> parse_method(std::string_view name);

// Score given to features whose rank is not backed by a gain value (the
// square MaxVol phase). Serialized as null.
inline constexpr double kUnscored = std::numeric_limits<double>::infinity();

// Ordered feature indices; any prefix of `order` is a selected feature set.
struct FeatureRanking {
  SelectionMethod method = SelectionMethod::kAll;
  Index n_features = 0;
  std::vector<Index> order;
  std::vector<double> scores;  // empty, or one score per entry of `order`
  bool converged = true;

  Index size() const { return static_cast<Index>(order.size()); }
  // Throws NSelectOutOfRange when n exceeds the ranking length.
  std::vector<Index> prefix(Index n) const;
  void validate() const;
};

// Identity order over all features ("all features" baseline).
FeatureRanking identity_ranking(Index n_features);

struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string created_at;  // ISO-8601 UTC
};

// {"method", "n_select", "n_features", "order", "scores", ["provenance"]}
std::string ranking_to_json(const FeatureRanking& ranking, const std::optional<Provenance>& provenance = {});
FeatureRanking ranking_from_json(std::string_view text);

std::string utc_timestamp();

}  // namespace maxfeat
