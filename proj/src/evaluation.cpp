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

#include "maxfeat/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "maxfeat/errors.hpp"

namespace maxfeat {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// splitmix64 finalizer; derives independent seeds from (base, salt).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SparseMatrix binarized(const SparseMatrix& m) {
  SparseMatrix out = m;
  for (Index r = 0; r < out.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(out, r); it; ++it) it.valueRef() = 1.0;
  return out;
}

SparseMatrix gather_rows(const SparseMatrix& m, std::span<const Index> rows) {
  std::vector<Triplet> entries;
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (SparseMatrix::InnerIterator it(m, rows[t]); it; ++it)
      entries.emplace_back(static_cast<Index>(t), it.col(), it.value());
  SparseMatrix out(static_cast<Index>(rows.size()), m.cols());
  out.setFromTriplets(entries.begin(), entries.end());
  out.makeCompressed();
  return out;
}

std::string number_key(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string selector_key(SelectionMethod method, const SearchConfig& c) {
  std::string key(method_name(method));
  switch (method) {
    case SelectionMethod::kMaxvol:
    case SelectionMethod::kNorm:
      key += "|" + number_key(c.mix.alpha) + "|" + number_key(c.mix.p) + "|" + std::to_string(c.mix.k);
      break;
    case SelectionMethod::kCfecbf:
      key += "|" + number_key(c.cfecbf.lambda1) + "|" + number_key(c.cfecbf.lambda2);
      break;
    default:
      break;
  }
  return key;
}

bool skippable(const Error& e) {
  return e.code() == ErrorCode::kRankTooLarge || e.code() == ErrorCode::kNSelectOutOfRange;
}

bool uses_embeddings(SelectionMethod m) { return m == SelectionMethod::kMaxvol || m == SelectionMethod::kNorm; }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

// ---------------------------------------------------------------------------
// Splits and metrics

SplitBundle split_items(const Dataset& dataset, const SplitRatios& ratios, std::uint64_t seed) {
  if (!(ratios.train > 0.0 && ratios.valid > 0.0 && ratios.test > 0.0) ||
      std::abs(ratios.train + ratios.valid + ratios.test - 1.0) > 1e-9)
    throw Error(ErrorCode::kInvalidArgument, "split ratios must be positive and sum to 1");
  const Index n = dataset.n_items();
  const auto n_valid = static_cast<Index>(std::llround(ratios.valid * static_cast<double>(n)));
  const auto n_test = static_cast<Index>(std::llround(ratios.test * static_cast<double>(n)));
  const Index n_train = n - n_valid - n_test;
  if (n_valid < 1 || n_test < 1 || n_train < 1)
    throw Error(ErrorCode::kTooFewItems, std::to_string(n) + " items cannot fill three non-empty splits");

  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  SplitBundle out;
  out.test_items.assign(perm.begin(), perm.begin() + n_test);
  out.valid_items.assign(perm.begin() + n_test, perm.begin() + n_test + n_valid);
  out.train_items.assign(perm.begin() + n_test + n_valid, perm.end());
  for (auto* items : {&out.train_items, &out.valid_items, &out.test_items}) std::sort(items->begin(), items->end());

  // item -> (split, local column)
  std::vector<std::pair<int, Index>> where(static_cast<std::size_t>(n));
  const std::vector<Index>* lists[] = {&out.train_items, &out.valid_items, &out.test_items};
  for (int s = 0; s < 3; ++s)
    for (std::size_t t = 0; t < lists[s]->size(); ++t) where[(*lists[s])[t]] = {s, static_cast<Index>(t)};

  std::vector<Triplet> entries[3];
  const SparseMatrix& r = dataset.interactions;
  for (Index u = 0; u < r.outerSize(); ++u)
    for (SparseMatrix::InnerIterator it(r, u); it; ++it) {
      const auto [s, local] = where[it.col()];
      entries[s].emplace_back(u, local, it.value());
    }
  SparseMatrix* views[] = {&out.train_interactions, &out.valid_interactions, &out.test_interactions};
  for (int s = 0; s < 3; ++s) {
    views[s]->resize(r.rows(), static_cast<Index>(lists[s]->size()));
    views[s]->setFromTriplets(entries[s].begin(), entries[s].end());
    views[s]->makeCompressed();
  }
  return out;
}

double recall_at_k(std::span<const Index> recommended, std::span<const Index> holdout, Index k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "metric cutoff must be >= 1");
  if (holdout.empty()) throw Error(ErrorCode::kInvalidArgument, "recall of an empty holdout");
  const std::set<Index> truth(holdout.begin(), holdout.end());
  const auto top = std::min<std::size_t>(static_cast<std::size_t>(k), recommended.size());
  std::size_t hits = 0;
  for (std::size_t t = 0; t < top; ++t) hits += truth.count(recommended[t]);
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double mrr_at_k(std::span<const Index> recommended, std::span<const Index> holdout, Index k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "metric cutoff must be >= 1");
  if (holdout.empty()) throw Error(ErrorCode::kInvalidArgument, "mrr of an empty holdout");
  const std::set<Index> truth(holdout.begin(), holdout.end());
  const auto top = std::min<std::size_t>(static_cast<std::size_t>(k), recommended.size());
  for (std::size_t t = 0; t < top; ++t)
    if (truth.count(recommended[t])) return 1.0 / static_cast<double>(t + 1);
  return 0.0;
}

double coverage_at_k(const std::vector<std::vector<Index>>& recommendations, Index catalog_size, Index k) {
  if (catalog_size <= 0) return 0.0;
  std::set<Index> seen;
  for (const auto& list : recommendations) {
    const auto top = std::min<std::size_t>(static_cast<std::size_t>(std::max<Index>(k, 0)), list.size());
    seen.insert(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(top));
  }
  return static_cast<double>(seen.size()) / static_cast<double>(catalog_size);
}

double jaccard(std::span<const Index> a, std::span<const Index> b) {
  const std::set<Index> sa(a.begin(), a.end());
  const std::set<Index> sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t common = 0;
  for (Index x : sa) common += sb.count(x);
  return static_cast<double>(common) / static_cast<double>(sa.size() + sb.size() - common);
}

MeanCi mean_ci(std::span<const double> values) {
  MeanCi out;
  if (values.empty()) return out;
  const auto n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    const boost::math::students_t dist(n - 1.0);
    out.half_width = boost::math::quantile(dist, 0.975) * sd / std::sqrt(n);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Search space and selectors

void EvalConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kConfigError, what); };
  if (metric_cutoff < 1) fail("metric cutoff must be >= 1");
  if (n_search_samples < 1) fail("n_search_samples must be >= 1");
  if (n_repeats < 1) fail("n_repeats must be >= 1");
  if (selection_fractions.empty()) fail("at least one selection fraction is required");
  for (double f : selection_fractions)
    if (!(f > 0.0 && f <= 1.0)) fail("selection fractions must lie in (0, 1]");
  if (mix.alpha.empty() || mix.p.empty() || mix.k.empty()) fail("mix grids must be nonempty");
  for (double a : mix.alpha)
    if (!(a >= 0.0 && a <= 1.0)) throw Error(ErrorCode::kAlphaOutOfRange, "alpha grid values must lie in [0, 1]");
  for (Index k : mix.k)
    if (k < 1) fail("embedding ranks must be >= 1");
  if (cfecbf.lambda1.empty() || cfecbf.lambda2.empty()) fail("cfecbf grids must be nonempty");
  if (model.neighbors.empty()) fail("model grid must be nonempty");
  if (jobs < 1) fail("jobs must be >= 1");
  maxvol.validate();
}

std::string describe(SelectionMethod method, const SearchConfig& c) {
  std::ostringstream os;
  os << method_name(method);
  if (uses_embeddings(method)) os << " alpha=" << c.mix.alpha << " p=" << c.mix.p << " k=" << c.mix.k;
  if (method == SelectionMethod::kCfecbf) os << " l1=" << c.cfecbf.lambda1 << " l2=" << c.cfecbf.lambda2;
  os << " neighbors=" << c.model.neighbors;
  return os.str();
}

std::vector<SearchConfig> search_space(SelectionMethod method, const EvalConfig& config) {
  std::vector<SearchConfig> selectors;
  if (uses_embeddings(method)) {
    for (double alpha : config.mix.alpha)
      for (double p : config.mix.p)
        for (Index k : config.mix.k) {
          SearchConfig c;
          c.mix = {alpha, p, k, config.seed};
          selectors.push_back(c);
        }
  } else if (method == SelectionMethod::kCfecbf) {
    for (double l1 : config.cfecbf.lambda1)
      for (double l2 : config.cfecbf.lambda2) {
        SearchConfig c;
        c.cfecbf = {l1, l2, config.cfecbf.learning_rate, config.cfecbf.epochs, config.seed};
        selectors.push_back(c);
      }
  } else {
    selectors.emplace_back();
  }
  std::vector<SearchConfig> out;
  for (const auto& s : selectors)
    for (Index neighbors : config.model.neighbors) {
      SearchConfig c = s;
      c.model.neighbors = neighbors;
      out.push_back(c);
    }
  return out;
}

Index features_for_fraction(double fraction, Index n_features) {
  const auto n = static_cast<Index>(std::llround(fraction * static_cast<double>(n_features)));
  return std::clamp<Index>(n, 1, n_features);
}

Index selection_count(SelectionMethod method, const SearchConfig& config, double fraction, Index n_features) {
  const Index n = features_for_fraction(fraction, n_features);
  if (method != SelectionMethod::kMaxvol) return n;
  return std::clamp<Index>(std::max(n, config.mix.k), 1, n_features);
}

FeatureRanking maxvol_prefix_ranking(const FeatureEmbeddings& embeddings, Index n, const MaxvolParams& params) {
  const Index length = std::clamp<Index>(std::max(n, embeddings.rank()), 0, embeddings.n_features());
  FeatureRanking ranking = select_features(embeddings, length, params);
  if (n < ranking.size()) {
    ranking.order.resize(static_cast<std::size_t>(n));
    ranking.scores.resize(static_cast<std::size_t>(n));
  }
  return ranking;
}

RankedSelection compute_ranking(SelectionMethod method, const SearchConfig& config, const SplitBundle& split,
                                const Dataset& dataset, const EvalConfig& eval, Index min_length,
                                std::uint64_t split_seed) {
  const auto start = Clock::now();
  const Index n_features = dataset.n_features();
  const Index length = std::clamp<Index>(min_length, 0, n_features);
  const SparseMatrix interactions =
      dataset.binarize ? binarized(split.train_interactions) : split.train_interactions;
  const SparseMatrix features = gather_rows(dataset.features, split.train_items);

  RankedSelection out;
  switch (method) {
    case SelectionMethod::kMaxvol:
    case SelectionMethod::kNorm: {
      MixParams params = config.mix;
      params.seed = split_seed;
      const FeatureEmbeddings embeddings = mix(interactions, features, params);
      if (method == SelectionMethod::kMaxvol) {
        out.ranking = select_features(embeddings, std::clamp(std::max(length, embeddings.rank()), Index{0}, n_features),
                                      eval.maxvol);
      } else {
        out.ranking = select_by_norm(embeddings, length);
      }
      break;
    }
    case SelectionMethod::kRandom:
      out.ranking = select_random(n_features, length, derive_seed(split_seed, 0x5eed));
      break;
    case SelectionMethod::kPopular:
      out.ranking = select_popular(interactions, features, length);
      break;
    case SelectionMethod::kCfecbf:
      out.ranking = cfecbf_weights(cosine_item_similarity(interactions), features, config.cfecbf);
      break;
    case SelectionMethod::kAll:
      out.ranking = identity_ranking(n_features);
      break;
  }
  out.fit_ms = elapsed_ms(start);
  return out;
}

const RankedSelection& SelectorCache::get(SelectionMethod method, const SearchConfig& config,
                                          const SplitBundle& split, const Dataset& dataset,
                                          const EvalConfig& eval, Index min_length, std::uint64_t split_seed) {
  const std::string key = selector_key(method, config);
  auto it = entries_.find(key);
  if (it != entries_.end() && it->second.ranking.size() >= std::min(min_length, dataset.n_features()))
    return it->second;
  RankedSelection fresh = compute_ranking(method, config, split, dataset, eval, min_length, split_seed);
  return entries_.insert_or_assign(key, std::move(fresh)).first->second;
}

// ---------------------------------------------------------------------------
// Model evaluation

SplitMetrics evaluate_selection(const Dataset& dataset, const SplitBundle& split, const FeatureRanking& ranking,
                                Index n_select, const KnnParams& model_params, Holdout holdout, Index cutoff) {
  const auto& cold_items = holdout == Holdout::kValidation ? split.valid_items : split.test_items;
  const auto& cold_view = holdout == Holdout::kValidation ? split.valid_interactions : split.test_interactions;

  SplitMetrics out;
  auto start = Clock::now();
  const KnnModel model = KnnModel::fit(dataset.features, split.train_items, ranking, n_select, model_params);
  out.fit_ms = elapsed_ms(start);

  const SparseMatrix cold_features = gather_rows(dataset.features, cold_items);
  start = Clock::now();
  const ColdCatalog catalog = model.prepare(cold_features);
  out.inference_ms = elapsed_ms(start);
  std::vector<std::vector<Index>> recommendations;
  std::vector<Index> history, truth;
  double recall_sum = 0.0, mrr_sum = 0.0;
  for (Index u = 0; u < cold_view.outerSize(); ++u) {
    truth.clear();
    for (SparseMatrix::InnerIterator it(cold_view, u); it; ++it) truth.push_back(it.col());
    if (truth.empty()) continue;
    history.clear();
    for (SparseMatrix::InnerIterator it(split.train_interactions, u); it; ++it)
      history.push_back(split.train_items[it.col()]);
    start = Clock::now();
    const Vector scores = model.score(catalog, history);
    auto top = recommend_top_n(scores, cutoff);
    out.inference_ms += elapsed_ms(start);
    recall_sum += recall_at_k(top, truth, cutoff);
    mrr_sum += mrr_at_k(top, truth, cutoff);
    recommendations.push_back(std::move(top));
    ++out.n_users;
  }
  if (out.n_users > 0) {
    out.recall = recall_sum / static_cast<double>(out.n_users);
    out.mrr = mrr_sum / static_cast<double>(out.n_users);
  }
  out.coverage = coverage_at_k(recommendations, static_cast<Index>(cold_items.size()), cutoff);
  return out;
}

SearchResult random_search(const Dataset& dataset, const SplitBundle& split, const EvalConfig& config,
                           SelectionMethod method, double fraction, std::uint64_t split_seed, SelectorCache* cache) {
  const std::vector<SearchConfig> space = search_space(method, config);
  if (space.empty()) throw Error(ErrorCode::kConfigError, "empty search space");

  std::vector<std::size_t> order(space.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(derive_seed(split_seed, 0x5ea4c4 + static_cast<std::uint64_t>(method)));
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(config.n_search_samples)));

  const Index n_features = dataset.n_features();
  Index min_length = features_for_fraction(fraction, n_features);
  for (double f : config.selection_fractions) min_length = std::max(min_length, features_for_fraction(f, n_features));

  SelectorCache local;
  SelectorCache& memo = cache ? *cache : local;
  SearchResult best;
  best.validation_recall = -1.0;
  std::optional<Error> last_error;
  for (std::size_t idx : order) {
    const SearchConfig& candidate = space[idx];
    try {
      const RankedSelection& sel = memo.get(method, candidate, split, dataset, config, min_length, split_seed);
      const Index n_select = selection_count(method, candidate, fraction, n_features);
      const SplitMetrics m =
          evaluate_selection(dataset, split, sel.ranking, n_select, candidate.model, Holdout::kValidation,
                             config.metric_cutoff);
      ++best.evaluated;
      if (m.recall > best.validation_recall) {
        best.validation_recall = m.recall;
        best.best = candidate;
      }
    } catch (const Error& e) {
      if (!skippable(e)) throw;
      last_error = e;
    }
  }
  if (best.evaluated == 0) {
    throw Error(ErrorCode::kConfigError, std::string("no valid configuration for ") +
                                             std::string(method_name(method)) +
                                             (last_error ? std::string(": ") + last_error->what() : std::string()));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Experiment driver

const Aggregate* EvalReport::find(SelectionMethod method, double fraction) const {
  for (const auto& a : aggregates)
    if (a.method == method && a.fraction == fraction) return &a;
  return nullptr;
}

std::vector<double> EvalReport::recalls(SelectionMethod method, double fraction) const {
  std::vector<double> out;
  for (const auto& c : cells)
    if (c.method == method && c.fraction == fraction) out.push_back(c.recall);
  return out;
}

EvalReport run_experiment(const Dataset& dataset, const EvalConfig& config, std::span<const SelectionMethod> methods) {
  config.validate();
  dataset.validate();
  if (methods.empty()) throw Error(ErrorCode::kConfigError, "no selection methods requested");

  const auto n_repeats = static_cast<std::size_t>(config.n_repeats);
  std::vector<std::vector<CellResult>> per_repeat(n_repeats);
  std::vector<std::exception_ptr> failures(n_repeats);

  auto run_repeat = [&](std::size_t r) {
    const std::uint64_t split_seed = derive_seed(config.seed, r);
    const SplitBundle split = split_items(dataset, config.ratios, split_seed);
    std::vector<CellResult>& cells = per_repeat[r];
    for (SelectionMethod method : methods) {
      SelectorCache cache;
      for (double fraction : config.selection_fractions) {
        const SearchResult search = random_search(dataset, split, config, method, fraction, split_seed, &cache);
        const Index n_select = selection_count(method, search.best, fraction, dataset.n_features());
        Index min_length = features_for_fraction(fraction, dataset.n_features());
        for (double f : config.selection_fractions)
          min_length = std::max(min_length, features_for_fraction(f, dataset.n_features()));
        const RankedSelection& sel = cache.get(method, search.best, split, dataset, config, min_length, split_seed);
        const SplitMetrics m = evaluate_selection(dataset, split, sel.ranking, n_select, search.best.model,
                                                  Holdout::kTest, config.metric_cutoff);
        CellResult cell;
        cell.method = method;
        cell.fraction = fraction;
        cell.repeat = static_cast<Index>(r);
        cell.n_selected = n_select;
        cell.best = search.best;
        cell.validation_recall = search.validation_recall;
        cell.recall = m.recall;
        cell.mrr = m.mrr;
        cell.coverage = m.coverage;
        cell.n_users = m.n_users;
        cell.fit_ms = sel.fit_ms + m.fit_ms;
        cell.inference_ms = m.inference_ms;
        if (!dataset.feature_categories.empty())
          for (Index j : sel.ranking.prefix(n_select)) ++cell.category_counts[dataset.feature_categories[j]];
        cells.push_back(std::move(cell));
      }
    }
  };

  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), n_repeats);
  if (workers <= 1) {
    for (std::size_t r = 0; r < n_repeats; ++r) run_repeat(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < n_repeats; r = next++) {
          try {
            run_repeat(r);
          } catch (...) {
            failures[r] = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
    for (auto& f : failures)
      if (f) std::rethrow_exception(f);
  }

  EvalReport report;
  report.methods.assign(methods.begin(), methods.end());
  report.fractions = config.selection_fractions;
  report.n_repeats = config.n_repeats;
  for (auto& cells : per_repeat)
    for (auto& c : cells) report.cells.push_back(std::move(c));

  std::map<std::string, Index> category_sizes;
  for (const auto& c : dataset.feature_categories) ++category_sizes[c];

  for (SelectionMethod method : methods)
    for (double fraction : config.selection_fractions) {
      std::vector<double> recall, mrr, coverage;
      std::map<std::string, double> proportions;
      for (const auto& c : report.cells) {
        if (c.method != method || c.fraction != fraction) continue;
        recall.push_back(c.recall);
        mrr.push_back(c.mrr);
        coverage.push_back(c.coverage);
        for (const auto& [cat, count] : c.category_counts)
          proportions[cat] += static_cast<double>(count) / static_cast<double>(category_sizes[cat]);
      }
      Aggregate a;
      a.method = method;
      a.fraction = fraction;
      a.recall = mean_ci(recall);
      a.mrr = mean_ci(mrr);
      a.coverage = mean_ci(coverage);
      for (const auto& [cat, size] : category_sizes)
        a.category_proportions[cat] = proportions[cat] / static_cast<double>(recall.size());
      report.aggregates.push_back(std::move(a));
    }

  if (std::find(methods.begin(), methods.end(), SelectionMethod::kMaxvol) != methods.end()) {
    for (double fraction : config.selection_fractions) {
      const Aggregate* ours = report.find(SelectionMethod::kMaxvol, fraction);
      const Aggregate* best = nullptr;
      for (auto m : {SelectionMethod::kRandom, SelectionMethod::kPopular, SelectionMethod::kCfecbf})
        if (const Aggregate* a = report.find(m, fraction); a && (!best || a->recall.mean > best->recall.mean)) best = a;
      if (!ours || !best || !(best->recall.mean > 0.0)) continue;
      report.improvements.push_back(
          {fraction, std::string(method_name(best->method)),
           100.0 * (ours->recall.mean - best->recall.mean) / best->recall.mean});
    }
  }
  report.generated_at = utc_timestamp();
  return report;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

nlohmann::ordered_json ci_json(const MeanCi& v) {
  nlohmann::ordered_json j;
  j["mean"] = v.mean;
  j["ci95"] = v.half_width ? nlohmann::ordered_json(*v.half_width) : nlohmann::ordered_json(nullptr);
  return j;
}

nlohmann::ordered_json config_json(SelectionMethod method, const SearchConfig& c) {
  nlohmann::ordered_json j;
  if (uses_embeddings(method)) {
    j["alpha"] = c.mix.alpha;
    j["p"] = c.mix.p;
    j["k"] = c.mix.k;
  }
  if (method == SelectionMethod::kCfecbf) {
    j["lambda1"] = c.cfecbf.lambda1;
    j["lambda2"] = c.cfecbf.lambda2;
  }
  j["neighbors"] = c.model.neighbors;
  return j;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  return out;
}

std::ofstream open_csv(const std::filesystem::path& path, const std::string& config_hash) {
  auto out = open_out(path);
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << '\n';
  return out;
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["config_hash"] = report.config_hash;
  j["generated_at"] = report.generated_at;
  j["n_repeats"] = report.n_repeats;
  auto methods = nlohmann::ordered_json::array();
  for (auto m : report.methods) methods.push_back(method_name(m));
  j["methods"] = methods;
  j["fractions"] = report.fractions;

  auto cells = nlohmann::ordered_json::array();
  for (const auto& c : report.cells) {
    nlohmann::ordered_json cell;
    cell["method"] = method_name(c.method);
    cell["fraction"] = c.fraction;
    cell["repeat"] = c.repeat;
    cell["n_selected"] = c.n_selected;
    cell["best_config"] = config_json(c.method, c.best);
    cell["validation_recall"] = c.validation_recall;
    cell["recall"] = c.recall;
    cell["mrr"] = c.mrr;
    cell["coverage"] = c.coverage;
    cell["n_users"] = c.n_users;
    if (!c.category_counts.empty()) cell["category_counts"] = c.category_counts;
    cells.push_back(std::move(cell));
  }
  j["cells"] = std::move(cells);

  auto aggregates = nlohmann::ordered_json::array();
  for (const auto& a : report.aggregates) {
    nlohmann::ordered_json agg;
    agg["method"] = method_name(a.method);
    agg["fraction"] = a.fraction;
    agg["recall"] = ci_json(a.recall);
    agg["mrr"] = ci_json(a.mrr);
    agg["coverage"] = ci_json(a.coverage);
    if (!a.category_proportions.empty()) agg["category_proportions"] = a.category_proportions;
    aggregates.push_back(std::move(agg));
  }
  j["aggregates"] = std::move(aggregates);

  auto improvements = nlohmann::ordered_json::array();
  for (const auto& imp : report.improvements)
    improvements.push_back({{"fraction", imp.fraction}, {"best_baseline", imp.best_baseline}, {"percent", imp.percent}});
  j["relative_improvement"] = std::move(improvements);
  return j.dump(2) + "\n";
}

void write_report(const EvalReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());

  open_out(dir / "report.json") << report_to_json(report);
  {
    auto out = open_csv(dir / "results.csv", report.config_hash);
    out << "method,fraction,repeat,n_selected,validation_recall,recall,mrr,coverage,n_users\n";
    for (const auto& c : report.cells)
      out << method_name(c.method) << ',' << fmt(c.fraction) << ',' << c.repeat << ',' << c.n_selected << ','
          << fmt(c.validation_recall) << ',' << fmt(c.recall) << ',' << fmt(c.mrr) << ',' << fmt(c.coverage) << ','
          << c.n_users << '\n';
  }
  {
    auto out = open_csv(dir / "aggregates.csv", report.config_hash);
    out << "method,fraction,recall_mean,recall_ci95,mrr_mean,mrr_ci95,coverage_mean,coverage_ci95\n";
    auto ci = [](const MeanCi& v) { return v.half_width ? fmt(*v.half_width) : std::string(); };
    for (const auto& a : report.aggregates)
      out << method_name(a.method) << ',' << fmt(a.fraction) << ',' << fmt(a.recall.mean) << ',' << ci(a.recall)
          << ',' << fmt(a.mrr.mean) << ',' << ci(a.mrr) << ',' << fmt(a.coverage.mean) << ',' << ci(a.coverage)
          << '\n';
  }
  {
    // One row per model, one column per selected-feature percentage.
    auto out = open_csv(dir / "improvement.csv", report.config_hash);
    out << "model";
    for (const auto& imp : report.improvements) out << ",pct_" << fmt(100.0 * imp.fraction);
    out << "\nItemKNN";
    for (const auto& imp : report.improvements) out << ',' << fmt(imp.percent);
    out << "\nbest_baseline";
    for (const auto& imp : report.improvements) out << ',' << imp.best_baseline;
    out << '\n';
  }
  {
    auto out = open_csv(dir / "timings.csv", report.config_hash);
    out << "method,fraction,repeat,fit_ms,inference_ms\n";
    for (const auto& c : report.cells)
      out << method_name(c.method) << ',' << fmt(c.fraction) << ',' << c.repeat << ',' << fmt(c.fit_ms) << ','
          << fmt(c.inference_ms) << '\n';
  }
}

std::string report_summary(const EvalReport& report) {
  std::ostringstream os;
  os << std::left << std::setw(10) << "method" << std::right << std::setw(10) << "fraction" << std::setw(12)
     << "recall@k" << std::setw(10) << "+-95%" << std::setw(10) << "mrr" << std::setw(10) << "coverage" << '\n';
  os << std::fixed << std::setprecision(4);
  for (const auto& a : report.aggregates) {
    os << std::left << std::setw(10) << method_name(a.method) << std::right << std::setw(10) << a.fraction
       << std::setw(12) << a.recall.mean << std::setw(10);
    if (a.recall.half_width) os << *a.recall.half_width;
    else os << "-";
    os << std::setw(10) << a.mrr.mean << std::setw(10) << a.coverage.mean << '\n';
  }
  if (!report.improvements.empty()) {
    os << "relative improvement of maxvol over the best baseline (%):\n";
    for (const auto& imp : report.improvements)
      os << "  fraction " << imp.fraction << ": " << std::setprecision(2) << imp.percent << " vs "
         << imp.best_baseline << std::setprecision(4) << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Timing and stability

TimingMedians measure_times(const std::function<void()>& fit, const std::function<void()>& infer, int repetitions) {
  if (repetitions < 3) throw Error(ErrorCode::kInvalidArgument, "measure_times needs at least 3 repetitions");
  fit();
  infer();
  std::vector<double> fit_ms, infer_ms;
  for (int r = 0; r < repetitions; ++r) {
    auto start = Clock::now();
    fit();
    fit_ms.push_back(elapsed_ms(start));
    start = Clock::now();
    infer();
    infer_ms.push_back(elapsed_ms(start));
  }
  return {median(fit_ms), median(infer_ms)};
}

StabilityResult selection_stability(const Dataset& dataset, const MixGrid& grid, const MaxvolParams& maxvol,
                                    double fraction, std::uint64_t seed) {
  const SparseMatrix interactions = dataset.interaction_view();
  const Index n = features_for_fraction(fraction, dataset.n_features());
  StabilityResult out;
  for (double alpha : grid.alpha)
    for (double p : grid.p)
      for (Index k : grid.k) {
        const MixParams params{alpha, p, k, seed};
        try {
          const FeatureEmbeddings embeddings = mix(interactions, dataset.features, params);
          out.selections.push_back(select_features(embeddings, std::clamp(std::max(n, k), Index{1}, dataset.n_features()),
                                                   maxvol).order);
        } catch (const Error& e) {
          if (!skippable(e)) throw;
          continue;
        }
        std::ostringstream label;
        label << "alpha=" << alpha << ";p=" << p << ";k=" << k;
        out.labels.push_back(label.str());
        out.configs.push_back(params);
      }
  const auto m = static_cast<Index>(out.selections.size());
  if (m == 0) throw Error(ErrorCode::kConfigError, "no grid configuration is valid for this dataset");
  out.jaccard.resize(m, m);
  for (Index a = 0; a < m; ++a)
    for (Index b = 0; b < m; ++b) out.jaccard(a, b) = jaccard(out.selections[a], out.selections[b]);
  return out;
}

void write_stability_csv(const StabilityResult& result, const std::filesystem::path& path,
                         const std::string& config_hash) {
  auto out = open_csv(path, config_hash);
  out << "config";
  for (const auto& l : result.labels) out << ',' << l;
  out << '\n';
  for (Index a = 0; a < result.jaccard.rows(); ++a) {
    out << result.labels[a];
    for (Index b = 0; b < result.jaccard.cols(); ++b) out << ',' << fmt(result.jaccard(a, b));
    out << '\n';
  }
}

}  // namespace maxfeat
