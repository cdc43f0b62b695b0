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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "maxfeat/linalg.hpp"

namespace maxfeat {

enum class FeatureMode { kCategorical, kTextual, kWeighted };
enum class TableFormat { kAuto, kTsv, kCsv };

struct IngestConfig {
  Index min_feature_items = 2;
  Index min_token_count = 10;
  FeatureMode mode = FeatureMode::kCategorical;
  TableFormat format = TableFormat::kAuto;
  // Use 0/1 interactions for similarity and popularity computations.
  bool binarize = true;
  // Items that appear only in the feature file become cold items. When false
  // they raise UnknownItem instead.
  bool allow_new_items = true;

  void validate() const;
};

// Insertion-ordered string interning.
class IdTable {
 public:
  Index intern(std::string_view id);
  std::optional<Index> find(std::string_view id) const;
  const std::vector<std::string>& names() const { return names_; }
  Index size() const { return static_cast<Index>(names_.size()); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Index> index_;
};

struct InteractionTable {
  SparseMatrix matrix;  // users x items
  IdTable users;
  IdTable items;
};

struct FeatureTable {
  SparseMatrix matrix;  // items x features
  std::vector<std::string> names;
  std::vector<std::string> categories;  // parallel to names, empty when unknown
};

struct Dataset {
  SparseMatrix interactions;  // users x items
  SparseMatrix features;      // items x features
  std::vector<std::string> user_ids;
  std::vector<std::string> item_ids;
  std::vector<std::string> feature_names;
  std::vector<std::string> feature_categories;  // empty or one label per feature
  bool binarize = true;

  Index n_users() const { return interactions.rows(); }
  Index n_items() const { return interactions.cols(); }
  Index n_features() const { return features.cols(); }

  // Interaction matrix as consumed by similarity and popularity code.
  SparseMatrix interaction_view() const;
  void validate() const;
};

// Rows are (user, item[, value]); a missing value counts as 1, duplicates are
// summed, nonpositive values are dropped.
InteractionTable load_interactions(const std::filesystem::path& path, TableFormat format = TableFormat::kAuto);

// Rows are (item, feature[, category]); one-hot encoded, then features present
// in fewer than cfg.min_feature_items items are removed.
FeatureTable load_categorical_features(const std::filesystem::path& path, const IngestConfig& cfg,
                                       IdTable& items);

// Rows are (item, text); texts of one item are concatenated and count-vectorized.
// Tokens seen fewer than cfg.min_token_count times overall are removed.
FeatureTable load_textual_features(const std::filesystem::path& path, const IngestConfig& cfg,
                                   IdTable& items);

// Rows are (item, feature, value). This is the layout write_dataset emits.
FeatureTable load_weighted_features(const std::filesystem::path& path, const IngestConfig& cfg,
                                    IdTable& items);

// Loads interactions.tsv, features.tsv and the optional categories.tsv,
// users.tsv and items.tsv from a dataset directory (.csv variants are also
// recognized).
Dataset load_dataset(const std::filesystem::path& dir, const IngestConfig& cfg);

// Canonical layout readable by load_dataset with FeatureMode::kWeighted.
void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);

std::vector<std::string> tokenize(std::string_view text);

}  // namespace maxfeat
