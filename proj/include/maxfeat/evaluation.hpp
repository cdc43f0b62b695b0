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
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "maxfeat/baselines.hpp"
#include "maxfeat/dataset.hpp"
#include "maxfeat/knn.hpp"
#include "maxfeat/maxvol.hpp"
#include "maxfeat/mix.hpp"
#include "maxfeat/ranking.hpp"

namespace maxfeat {

struct SplitRatios {
  double train = 0.7;
  double valid = 0.1;
  double test = 0.2;
};

// Item-disjoint partition. Interaction views keep every user and the columns
// of the split's items, in the order of the item lists.
struct SplitBundle {
  std::vector<Index> train_items;  // sorted dataset item indices
  std::vector<Index> valid_items;
  std::vector<Index> test_items;
  SparseMatrix train_interactions;
  SparseMatrix valid_interactions;
  SparseMatrix test_interactions;
};

SplitBundle split_items(const Dataset& dataset, const SplitRatios& ratios, std::uint64_t seed);

// Per-user metrics; `holdout` must be nonempty.
double recall_at_k(std::span<const Index> recommended, std::span<const Index> holdout, Index k);
double mrr_at_k(std::span<const Index> recommended, std::span<const Index> holdout, Index k);
// Share of the catalog appearing in at least one top-k list.
double coverage_at_k(const std::vector<std::vector<Index>>& recommendations, Index catalog_size, Index k);
// |a & b| / |a | b|, 1 for two empty sets.
double jaccard(std::span<const Index> a, std::span<const Index> b);

struct MixGrid {
  std::vector<double> alpha{0.2, 0.5, 0.8};
  std::vector<double> p{-1.0, -0.5, 0.0, 0.5};
  std::vector<Index> k{100, 200, 400};
};

struct CfecbfGrid {
  std::vector<double> lambda1{0.0, 1e-3};
  std::vector<double> lambda2{0.0, 1e-3};
  double learning_rate = 0.1;
  Index epochs = 100;
};

struct ModelGrid {
  std::vector<Index> neighbors{0};
};

struct EvalConfig {
  Index metric_cutoff = 10;
  Index n_search_samples = 20;
  Index n_repeats = 10;
  std::vector<double> selection_fractions{0.01, 0.05, 0.10, 0.20, 0.30};
  SplitRatios ratios;
  MixGrid mix;
  CfecbfGrid cfecbf;
  ModelGrid model;
  MaxvolParams maxvol;
  std::uint64_t seed = 0;
  Index jobs = 1;

  void validate() const;
};

// One point of the joint selector x model hyperparameter space.
struct SearchConfig {
  MixParams mix;
  CfecbfParams cfecbf;
  KnnParams model;
};

std::string describe(SelectionMethod method, const SearchConfig& config);

// The selector-relevant part of the search space for a method, in a fixed order.
std::vector<SearchConfig> search_space(SelectionMethod method, const EvalConfig& config);

// Number of features kept for a selection fraction: max(1, round(fraction * n_features)).
Index features_for_fraction(double fraction, Index n_features);

// Features a method keeps at a selection fraction. Maxvol keeps at least
// config.mix.k features; the adjusted count is what cells report as n_selected.
Index selection_count(SelectionMethod method, const SearchConfig& config, double fraction, Index n_features);

struct RankedSelection {
  FeatureRanking ranking;
  double fit_ms = 0.0;
};

// Memo of selector outputs for one split, keyed by selector hyperparameters.
class SelectorCache {
 public:
  const RankedSelection& get(SelectionMethod method, const SearchConfig& config, const SplitBundle& split,
                             const Dataset& dataset, const EvalConfig& eval, Index min_length,
                             std::uint64_t split_seed);

 private:
  std::map<std::string, RankedSelection> entries_;
};

// Ranking for the train part of a split. Maxvol and norm rankings are
// computed on train items only, as are popularity and CFeCBF statistics.
RankedSelection compute_ranking(SelectionMethod method, const SearchConfig& config, const SplitBundle& split,
                                const Dataset& dataset, const EvalConfig& eval, Index min_length,
                                std::uint64_t split_seed);

struct SplitMetrics {
  double recall = 0.0;
  double mrr = 0.0;
  double coverage = 0.0;
  Index n_users = 0;
  double fit_ms = 0.0;
  double inference_ms = 0.0;
};

enum class Holdout { kValidation, kTest };

// Fits ItemKNN on the train items with the first n_select ranked features and
// scores the holdout catalog for every user with holdout interactions.
SplitMetrics evaluate_selection(const Dataset& dataset, const SplitBundle& split, const FeatureRanking& ranking,
                                Index n_select, const KnnParams& model, Holdout holdout, Index cutoff);

struct SearchResult {
  SearchConfig best;
  double validation_recall = 0.0;
  Index evaluated = 0;
};

SearchResult random_search(const Dataset& dataset, const SplitBundle& split, const EvalConfig& config,
                           SelectionMethod method, double fraction, std::uint64_t split_seed,
                           SelectorCache* cache = nullptr);

struct CellResult {
  SelectionMethod method = SelectionMethod::kAll;
  double fraction = 0.0;
  Index repeat = 0;
  Index n_selected = 0;
  SearchConfig best;
  double validation_recall = 0.0;
  double recall = 0.0;
  double mrr = 0.0;
  double coverage = 0.0;
  Index n_users = 0;
  double fit_ms = 0.0;
  double inference_ms = 0.0;
  std::map<std::string, Index> category_counts;  // selected features per category
};

struct MeanCi {
  double mean = 0.0;
  std::optional<double> half_width;  // 95% Student-t, present when n >= 2
};

MeanCi mean_ci(std::span<const double> values);

struct Aggregate {
  SelectionMethod method = SelectionMethod::kAll;
  double fraction = 0.0;
  MeanCi recall;
  MeanCi mrr;
  MeanCi coverage;
  std::map<std::string, double> category_proportions;
};

struct Improvement {
  double fraction = 0.0;
  std::string best_baseline;
  double percent = 0.0;
};

struct EvalReport {
  std::vector<SelectionMethod> methods;
  std::vector<double> fractions;
  Index n_repeats = 0;
  std::vector<CellResult> cells;  // ordered by repeat, method, fraction
  std::vector<Aggregate> aggregates;
  std::vector<Improvement> improvements;
  std::string config_hash;
  std::string generated_at;

  const Aggregate* find(SelectionMethod method, double fraction) const;
  std::vector<double> recalls(SelectionMethod method, double fraction) const;
};

EvalReport run_experiment(const Dataset& dataset, const EvalConfig& config, std::span<const SelectionMethod> methods);

// report.json (timing-free), results.csv, aggregates.csv, improvement.csv, timings.csv
void write_report(const EvalReport& report, const std::filesystem::path& dir);
std::string report_to_json(const EvalReport& report);
std::string report_summary(const EvalReport& report);

struct TimingMedians {
  double fit_ms = 0.0;
  double inference_ms = 0.0;
};

// Medians over `repetitions` runs of each callable after one warmup run.
TimingMedians measure_times(const std::function<void()>& fit, const std::function<void()>& infer, int repetitions);

struct StabilityResult {
  std::vector<std::string> labels;
  std::vector<MixParams> configs;
  std::vector<std::vector<Index>> selections;
  DenseMatrix jaccard;
};

// MaxVol selections of `fraction` of the features for every mix-grid point on
// the whole dataset, and their pairwise Jaccard coefficients.
StabilityResult selection_stability(const Dataset& dataset, const MixGrid& grid, const MaxvolParams& maxvol,
                                    double fraction = 0.10, std::uint64_t seed = 0);
void write_stability_csv(const StabilityResult& result, const std::filesystem::path& path,
                         const std::string& config_hash = "");

// Maxvol ranking truncated to n features; when n is below the embedding rank
// the square-phase order is cut.
FeatureRanking maxvol_prefix_ranking(const FeatureEmbeddings& embeddings, Index n, const MaxvolParams& params);

}  // namespace maxfeat
