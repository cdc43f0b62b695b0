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

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "maxfeat/baselines.hpp"
#include "maxfeat/evaluation.hpp"
#include "maxfeat/knn.hpp"
#include "maxfeat/maxvol.hpp"
#include "maxfeat/mix.hpp"
#include "maxfeat/synthetic.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace maxfeat;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

SparseMatrix random_binary(Index rows, Index cols, double density, std::mt19937_64& rng) {
  std::bernoulli_distribution on(density);
  std::vector<Triplet> t;
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      if (on(rng)) t.emplace_back(i, j, 1.0);
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseMatrix gather(const SparseMatrix& m, const std::vector<Index>& rows) {
  std::vector<Triplet> t;
  Index r = 0;
  for (Index i : rows) {
    for (SparseMatrix::InnerIterator it(m, i); it; ++it) t.emplace_back(r, it.col(), it.value());
    ++r;
  }
  SparseMatrix out(r, m.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

// The planted corpus used throughout: default generator sizes with Zipf noise.
PlantedDataset planted_corpus(std::uint64_t seed) {
  PlantedParams p;
  p.noise_skew = 1.0;
  p.seed = seed;
  return generate_planted(p);
}

Outcome linear_algebra() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20260101);
  double worst_chol = 0.0;
  int chol_ok = 0;
  for (int t = 0; t < 200; ++t) {
    const Index n = std::uniform_int_distribution<Index>(2, 100)(rng);
    const Index users = std::uniform_int_distribution<Index>(5, 150)(rng);
    const double density = std::uniform_real_distribution<double>(0.05, 0.3)(rng);
    const double alpha = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const DenseMatrix s = blend_similarity(cosine_item_similarity(random_binary(users, n, density, rng)), alpha);
    const CholeskyFactor f = cholesky(s);
    const double rel = (f.lower * f.lower.transpose() - s).norm() / s.norm();
    worst_chol = std::max(worst_chol, rel);
    if (rel <= 1e-8) ++chol_ok;
  }
  double worst_svd = 0.0;
  int svd_ok = 0;
  for (int t = 0; t < 50; ++t) {
    const Index rows = std::uniform_int_distribution<Index>(2, 200)(rng);
    const Index cols = std::uniform_int_distribution<Index>(2, 200)(rng);
    const Index k = std::uniform_int_distribution<Index>(1, std::max<Index>(1, std::min(rows, cols) / 2))(rng);
    const DenseMatrix a = oracle::random_matrix(rows, cols, rng());
    const TruncatedSvd svd = truncated_svd(a, k, 0);
    const std::vector<double> expected = oracle::singular_values(a);
    double rel = 0.0;
    for (Index i = 0; i < k; ++i) rel = std::max(rel, std::abs(svd.sigma(i) - expected[i]) / expected[i]);
    worst_svd = std::max(worst_svd, rel);
    if (rel <= 1e-6) ++svd_ok;
  }
  const double elapsed = seconds_since(start);
  return {chol_ok == 200 && svd_ok == 50 && elapsed < 30.0,
          format("cholesky %d/200 within 1e-8 (worst %.2e), svd %d/50 within 1e-6 (worst %.2e), %.1f s", chol_ok,
                 worst_chol, svd_ok, worst_svd, elapsed)};
}

Outcome maxvol_quality() {
  const auto start = std::chrono::steady_clock::now();
  MaxvolParams params;
  int dominant = 0, near_optimal = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const DenseMatrix v = oracle::random_matrix(10, 3, 7000 + seed);
    const SquareMaxvol result = square_maxvol(v, params);
    const DenseMatrix sub = oracle::rows_of(v, result.rows);
    if ((v * sub.inverse()).cwiseAbs().maxCoeff() <= params.tol + 1e-12) ++dominant;
    const double vol = std::abs(oracle::determinant(sub));
    if (vol >= oracle::exhaustive_max_volume(v).volume / std::pow(params.tol, 3)) ++near_optimal;
  }
  DenseMatrix fixture(4, 2);
  fixture << 1, 0, 0, 1, 10, 0, 0, 10;
  auto rows = square_maxvol(fixture).rows;
  std::sort(rows.begin(), rows.end());
  const double vol = std::abs(oracle::determinant(oracle::rows_of(fixture, rows)));
  const bool fixture_ok = rows == std::vector<Index>{2, 3} && std::abs(vol - 100.0) <= 1e-9 &&
                          std::abs(oracle::exhaustive_max_volume(fixture).volume - 100.0) <= 1e-9;
  const double elapsed = seconds_since(start);
  return {dominant == 100 && near_optimal >= 99 && fixture_ok && elapsed < 10.0,
          format("dominance %d/100, volume >= optimum/tol^3 %d/100, fixture rows {%lld, %lld} volume %.6g, %.2f s",
                 dominant, near_optimal, static_cast<long long>(rows[0]), static_cast<long long>(rows[1]), vol,
                 elapsed)};
}

Outcome equation_fixtures() {
  std::vector<std::string> failures;
  DenseMatrix sim(3, 3);
  sim << 1, 0.7071068, 0.25, 0.7071068, 1, 0.5, 0.25, 0.5, 1;
  if (blend_similarity(sim, 0.0) != DenseMatrix::Identity(3, 3)) failures.push_back("blend alpha=0");
  if (blend_similarity(sim, 1.0) != sim) failures.push_back("blend alpha=1");

  DenseMatrix fw(3, 2);
  fw << 1.5, 0, 0, 2.25, 0.5, 1;
  const Vector pops = Vector::LinSpaced(3, 1.0, 7.0);
  if (inject_collaborative(to_sparse(fw), DenseMatrix::Identity(3, 3), pops, 0.0) != fw)
    failures.push_back("inject at S=I, p=0");

  DenseMatrix r(2, 3);
  r << 1, 1, 0, 0, 1, 0;
  if (select_popular(to_sparse(r), to_sparse(DenseMatrix::Identity(3, 3)), 3).order != std::vector<Index>{1, 0, 2})
    failures.push_back("popular toy order");

  Vector full(4), restricted(4);
  full << 0, 3, 2, 2;
  restricted << 0, 1, 1, 2;
  const auto a = recommend_top_n(full, 1), b = recommend_top_n(restricted, 1);
  if (a != std::vector<Index>{1}) failures.push_back("toy decision [0,3,2,2]");
  if (b != std::vector<Index>{3}) failures.push_back("toy decision [0,1,1,2]");

  std::string detail = "blend limits, inject identity, popular [1, 0, 2], toy decisions -> item " +
                       std::to_string(a[0]) + " and item " + std::to_string(b[0]);
  for (const auto& f : failures) detail += "; FAILED " + f;
  return {failures.empty(), detail};
}

Outcome planted_recovery() {
  const auto start = std::chrono::steady_clock::now();
  double maxvol_sum = 0.0, random_sum = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const PlantedDataset planted = planted_corpus(seed);
    const std::set<Index> truth(planted.planted.begin(), planted.planted.end());
    MixParams mp;
    mp.alpha = 0.8;
    mp.p = 0.0;
    mp.k = 32;
    mp.seed = seed;
    const FeatureEmbeddings emb = mix(planted.dataset, mp);
    const auto chosen = maxvol_prefix_ranking(emb, 30, MaxvolParams{}).order;
    const auto random = select_random(planted.dataset.n_features(), 30, seed).order;
    auto hits = [&](const std::vector<Index>& s) {
      return static_cast<double>(std::count_if(s.begin(), s.end(), [&](Index j) { return truth.count(j) > 0; })) / 30.0;
    };
    maxvol_sum += hits(chosen);
    random_sum += hits(random);
  }
  const double maxvol = maxvol_sum / 10.0, random = random_sum / 10.0;
  const double elapsed = seconds_since(start);
  return {maxvol >= 0.80 && std::abs(random - 0.10) <= 0.05 && elapsed < 120.0,
          format("maxvol recovers %.1f%% of planted features, random %.1f%%, %.1f s", 100.0 * maxvol, 100.0 * random,
                 elapsed)};
}

struct Study {
  EvalReport main;
  EvalReport content_only;
  double seconds = 0.0;
};

const Study& planted_study() {
  static const Study study = [] {
    const auto start = std::chrono::steady_clock::now();
    const PlantedDataset planted = planted_corpus(0);
    EvalConfig c;
    c.n_repeats = 10;
    c.selection_fractions = {0.03, 0.10};
    c.mix.alpha = {0.2, 0.5, 0.8};
    c.mix.p = {-0.5, 0.0, 0.5};
    // Ranks within the 3% budget (9 of 300 features), so every method keeps the same count.
    c.mix.k = {4, 8};
    c.seed = 2026;
    const std::vector<SelectionMethod> methods{SelectionMethod::kMaxvol, SelectionMethod::kNorm,
                                               SelectionMethod::kRandom, SelectionMethod::kPopular};
    Study s;
    s.main = run_experiment(planted.dataset, c, methods);
    EvalConfig content = c;
    content.mix.alpha = {0.0};
    const std::vector<SelectionMethod> maxvol_only{SelectionMethod::kMaxvol};
    s.content_only = run_experiment(planted.dataset, content, maxvol_only);
    s.seconds = seconds_since(start);
    return s;
  }();
  return study;
}

MeanCi paired_difference(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return mean_ci(d);
}

Outcome maxvol_beats_baselines() {
  const Study& s = planted_study();
  const auto maxvol = s.main.recalls(SelectionMethod::kMaxvol, 0.10);
  const auto random = s.main.recalls(SelectionMethod::kRandom, 0.10);
  const auto content = s.content_only.recalls(SelectionMethod::kMaxvol, 0.10);
  const MeanCi vs_random = paired_difference(maxvol, random);
  const MeanCi vs_content = paired_difference(maxvol, content);
  const bool ok = vs_random.mean > 0.0 && vs_random.mean - *vs_random.half_width > 0.0 && vs_content.mean > 0.0 &&
                  vs_content.mean - *vs_content.half_width > 0.0 && s.seconds < 300.0;
  return {ok, format("Recall@10 at 10%%: maxvol %.4f, random %.4f, maxvol(alpha=0) %.4f; maxvol-random %.4f +- %.4f, "
                     "alpha!=0 minus alpha=0 %.4f +- %.4f; study %.1f s",
                     s.main.find(SelectionMethod::kMaxvol, 0.10)->recall.mean,
                     s.main.find(SelectionMethod::kRandom, 0.10)->recall.mean,
                     s.content_only.find(SelectionMethod::kMaxvol, 0.10)->recall.mean, vs_random.mean,
                     *vs_random.half_width, vs_content.mean, *vs_content.half_width, s.seconds)};
}

Outcome ranking_ablation() {
  const Study& s = planted_study();
  const Aggregate& maxvol = *s.main.find(SelectionMethod::kMaxvol, 0.03);
  const Aggregate& norm = *s.main.find(SelectionMethod::kNorm, 0.03);
  const Aggregate& random = *s.main.find(SelectionMethod::kRandom, 0.03);
  const double gap = (maxvol.recall.mean - *maxvol.recall.half_width) - (random.recall.mean + *random.recall.half_width);
  const bool ok = maxvol.recall.mean >= norm.recall.mean && norm.recall.mean >= random.recall.mean && gap > 0.0;
  const MeanCi vs_norm = paired_difference(s.main.recalls(SelectionMethod::kMaxvol, 0.03),
                                           s.main.recalls(SelectionMethod::kNorm, 0.03));
  return {ok, format("Recall@10 at 3%%: maxvol %.4f +- %.4f, norm %.4f +- %.4f, random %.4f +- %.4f; "
                     "paired maxvol-norm %.4f +- %.4f",
                     maxvol.recall.mean, *maxvol.recall.half_width, norm.recall.mean, *norm.recall.half_width,
                     random.recall.mean, *random.recall.half_width, vs_norm.mean, *vs_norm.half_width)};
}

Outcome inference_speedup() {
  PlantedParams p;
  p.n_items = 5000;
  p.n_features = 9000;
  p.n_planted = 300;
  p.n_users = 5000;
  p.noise_skew = 1.0;
  p.seed = 1;
  const PlantedDataset planted = generate_planted(p);
  const Dataset& d = planted.dataset;
  const SplitBundle split = split_items(d, SplitRatios{}, 1);
  const SparseMatrix cold = gather(d.features, split.test_items);
  std::vector<std::vector<Index>> histories;
  for (Index u = 0; u < split.train_interactions.outerSize(); ++u) {
    histories.emplace_back();
    for (SparseMatrix::InnerIterator it(split.train_interactions, u); it; ++it)
      histories.back().push_back(split.train_items[it.col()]);
  }
  // The most popular features are the densest ones, which makes this the slowest 1% subset.
  const FeatureRanking popular =
      select_popular(split.train_interactions, gather(d.features, split.train_items), d.n_features());

  auto time_model = [&](const FeatureRanking& ranking, Index n) {
    std::optional<KnnModel> model;
    double sink = 0.0;
    const TimingMedians t = measure_times(
        [&] { model = KnnModel::fit(d.features, split.train_items, ranking, n); },
        [&] {
          const ColdCatalog catalog = model->prepare(cold);
          for (const auto& h : histories) sink += model->score(catalog, h).sum();
        },
        5);
    if (!std::isfinite(sink)) std::abort();
    return t;
  };
  const TimingMedians small = time_model(popular, features_for_fraction(0.01, d.n_features()));
  const TimingMedians full = time_model(identity_ranking(d.n_features()), d.n_features());
  const double ratio = full.inference_ms / small.inference_ms;

  const SplitMetrics small_e2e =
      evaluate_selection(d, split, popular, features_for_fraction(0.01, d.n_features()), {}, Holdout::kTest, 10);
  const SplitMetrics full_e2e =
      evaluate_selection(d, split, identity_ranking(d.n_features()), d.n_features(), {}, Holdout::kTest, 10);
  return {ratio >= 2.0, format("scoring %.1f ms at 1%% vs %.1f ms at 100%% (%.2fx); with top-10 ranking %.1f vs %.1f ms "
                               "(%.2fx)",
                               small.inference_ms, full.inference_ms, ratio, small_e2e.inference_ms,
                               full_e2e.inference_ms, full_e2e.inference_ms / small_e2e.inference_ms)};
}

int run_cli(const std::string& args, const std::filesystem::path& log) {
  const std::string cmd = "'" MAXFEAT_CLI "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome cli_determinism() {
  testutil::TempDir dir;
  const auto data = dir / "data";
  if (run_cli("synth --out '" + data.string() + "' --noise-skew 1.0 --seed 4", dir / "synth.log") != 0)
    return {false, "synth command failed: " + testutil::read_file(dir / "synth.log")};
  const auto cfg = dir.write("run.toml",
                             "[data]\npath = \"data\"\nmode = \"weighted\"\nmin_feature_items = 1\n"
                             "[mix]\nalpha = [0.2, 0.8]\np = [-0.5, 0.0]\nk = [16, 32]\n"
                             "[cfecbf]\nepochs = 20\n"
                             "[eval]\nmethods = [\"maxvol\", \"random\", \"popular\", \"cfecbf\", \"norm\"]\n"
                             "fractions = [0.05, 0.1]\nn_repeats = 3\nseed = 11\n");
  for (const char* run : {"a", "b"}) {
    const std::string jobs = run[0] == 'a' ? "1" : "2";
    if (run_cli("evaluate -c '" + cfg.string() + "' --jobs " + jobs + " --out '" + (dir / run).string() + "'",
                dir / (std::string(run) + ".log")) != 0)
      return {false, "evaluate failed: " + testutil::read_file(dir / (std::string(run) + ".log"))};
  }
  std::vector<std::string> differing;
  for (const char* name : {"results.csv", "aggregates.csv", "improvement.csv"})
    if (testutil::read_file(dir / "a" / name) != testutil::read_file(dir / "b" / name)) differing.push_back(name);
  auto a = nlohmann::json::parse(testutil::read_file(dir / "a" / "report.json"));
  auto b = nlohmann::json::parse(testutil::read_file(dir / "b" / "report.json"));
  a.erase("generated_at");
  b.erase("generated_at");
  if (a.dump() != b.dump()) differing.push_back("report.json");
  std::string detail = "report.json (minus generated_at), results.csv, aggregates.csv, improvement.csv";
  detail += differing.empty() ? " identical across serial and 2-thread runs" : " differ:";
  for (const auto& f : differing) detail += " " + f;
  return {differing.empty(), detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"linear-algebra oracles", linear_algebra},
      {"maxvol dominance and optimality", maxvol_quality},
      {"equation fixtures", equation_fixtures},
      {"planted-feature recovery", planted_recovery},
      {"maxvol beats baselines at 10%", maxvol_beats_baselines},
      {"ranking-method ablation at 3%", ranking_ablation},
      {"inference speedup at 1% of features", inference_speedup},
      {"evaluate determinism", cli_determinism},
  };
  int failures = 0;
  int index = 1;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", index++, name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
