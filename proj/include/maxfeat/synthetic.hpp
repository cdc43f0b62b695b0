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

#include "maxfeat/dataset.hpp"

namespace maxfeat {

// Generator for datasets with a known set of behaviorally relevant features.
// Users like a few "planted" features and consume items carrying them; every
// item additionally carries noise features drawn from a Zipf-like law, so
// frequent noise features compete with the planted ones on content alone.
struct PlantedParams {
  Index n_items = 400;
  Index n_features = 300;
  Index n_planted = 30;
  Index planted_per_item = 3;
  Index noise_per_item = 5;
  Index n_users = 2000;
  Index likes_per_user = 2;
  Index interactions_per_user = 20;
  // Zipf exponent over noise features; 0 draws them uniformly.
  double noise_skew = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PlantedDataset {
  Dataset dataset;
  std::vector<Index> planted;  // sorted feature indices
};

PlantedDataset generate_planted(const PlantedParams& params);

}  // namespace maxfeat
