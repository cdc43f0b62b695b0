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

#include "maxfeat/maxfeat.h"

#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "maxfeat/baselines.hpp"
#include "maxfeat/config.hpp"
#include "maxfeat/errors.hpp"
#include "maxfeat/evaluation.hpp"
#include "maxfeat/mix.hpp"
#include "maxfeat/ranking.hpp"
#include "maxfeat/synthetic.hpp"

struct mf_config {
  maxfeat::RunConfig value;
};

struct mf_dataset {
  maxfeat::Dataset value;
};

struct mf_ranking {
  maxfeat::FeatureRanking value;
  maxfeat::Provenance provenance;
};

struct mf_embeddings {
  maxfeat::FeatureEmbeddings value;
};

struct mf_report {
  maxfeat::EvalReport value;
};

namespace {

thread_local std::string last_error;

mf_status fail(mf_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

mf_status status_for(maxfeat::ErrorCode code) {
  switch (maxfeat::error_class(code)) {
    case maxfeat::ErrorClass::kConfig: return MF_ERR_CONFIG;
    case maxfeat::ErrorClass::kData: return MF_ERR_DATA;
    case maxfeat::ErrorClass::kNumeric: return MF_ERR_NUMERIC;
  }
  return MF_ERR_INTERNAL;
}

template <typename F>
mf_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return MF_OK;
  } catch (const maxfeat::Error& e) {
    return fail(status_for(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(MF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MF_ERR_INTERNAL, "unknown failure");
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

#define MF_REQUIRE(cond) \
  do {                    \
    if (!(cond)) return fail(MF_ERR_INVALID, "invalid argument: " #cond); \
  } while (0)

maxfeat::FeatureRanking truncated(maxfeat::FeatureRanking ranking, maxfeat::Index n) {
  if (n < ranking.size()) {
    ranking.order.resize(static_cast<std::size_t>(n));
    if (!ranking.scores.empty()) ranking.scores.resize(static_cast<std::size_t>(n));
  }
  return ranking;
}

maxfeat::FeatureRanking run_selection(const maxfeat::RunConfig& config, const maxfeat::Dataset& dataset) {
  using maxfeat::SelectionMethod;
  const auto& s = config.select;
  const maxfeat::Index n = maxfeat::features_for_fraction(s.fraction, dataset.n_features());
  const maxfeat::SparseMatrix interactions = dataset.interaction_view();
  maxfeat::MixParams mix = s.mix;
  mix.seed = config.eval.seed;
  switch (s.method) {
    case SelectionMethod::kMaxvol: {
      maxfeat::SearchConfig search;
      search.mix = mix;
      const maxfeat::Index count = maxfeat::selection_count(s.method, search, s.fraction, dataset.n_features());
      return maxfeat::select_features(maxfeat::mix(interactions, dataset.features, mix), count, config.eval.maxvol);
    }
    case SelectionMethod::kNorm:
      return maxfeat::select_by_norm(maxfeat::mix(interactions, dataset.features, mix), n);
    case SelectionMethod::kRandom:
      return maxfeat::select_random(dataset.n_features(), n, config.eval.seed);
    case SelectionMethod::kPopular:
      return maxfeat::select_popular(interactions, dataset.features, n);
    case SelectionMethod::kCfecbf: {
      maxfeat::CfecbfParams params = s.cfecbf;
      params.learning_rate = config.eval.cfecbf.learning_rate;
      params.epochs = config.eval.cfecbf.epochs;
      params.seed = config.eval.seed;
      return truncated(
          maxfeat::cfecbf_weights(maxfeat::cosine_item_similarity(interactions), dataset.features, params), n);
    }
    case SelectionMethod::kAll:
      return truncated(maxfeat::identity_ranking(dataset.n_features()), n);
  }
  return {};
}

}  // namespace

extern "C" {

const char* mf_version(void) { return "0.3.0"; }

const char* mf_status_name(mf_status status) {
  switch (status) {
    case MF_OK: return "ok";
    case MF_ERR_INVALID: return "invalid argument";
    case MF_ERR_CONFIG: return "config error";
    case MF_ERR_DATA: return "data error";
    case MF_ERR_NUMERIC: return "numeric failure";
    case MF_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* mf_last_error(void) { return last_error.c_str(); }

void mf_string_free(char* text) { std::free(text); }

mf_status mf_config_default(mf_config** out) {
  MF_REQUIRE(out != nullptr);
  return guarded([&] { *out = new mf_config{}; });
}

mf_status mf_config_load(const char* path, mf_config** out) {
  MF_REQUIRE(path != nullptr && out != nullptr);
  return guarded([&] { *out = new mf_config{maxfeat::load_config(path)}; });
}

mf_status mf_config_set(mf_config* config, const char* key, const char* value) {
  MF_REQUIRE(config != nullptr && key != nullptr && value != nullptr);
  return guarded([&] { maxfeat::set_config_value(config->value, key, value); });
}

mf_status mf_config_apply_env(mf_config* config) {
  MF_REQUIRE(config != nullptr);
  return guarded([&] { maxfeat::apply_env_overrides(config->value); });
}

mf_status mf_config_validate(const mf_config* config) {
  MF_REQUIRE(config != nullptr);
  return guarded([&] { config->value.validate(); });
}

mf_status mf_config_hash(const mf_config* config, char* buffer, size_t size) {
  MF_REQUIRE(config != nullptr && buffer != nullptr && size >= 17);
  return guarded([&] {
    const std::string h = maxfeat::config_hash(config->value);
    std::memcpy(buffer, h.c_str(), h.size() + 1);
  });
}

mf_status mf_config_dump(const mf_config* config, char** out) {
  MF_REQUIRE(config != nullptr && out != nullptr);
  return guarded([&] { *out = copy_string(maxfeat::dump_config(config->value)); });
}

mf_status mf_config_paths(const mf_config* config, char** data_dir, char** output_dir) {
  MF_REQUIRE(config != nullptr);
  return guarded([&] {
    if (data_dir) *data_dir = copy_string(config->value.resolved_data_path().string());
    if (output_dir) *output_dir = copy_string(config->value.resolved_output_dir().string());
  });
}

void mf_config_free(mf_config* config) { delete config; }

mf_status mf_dataset_load(const mf_config* config, mf_dataset** out) {
  MF_REQUIRE(config != nullptr && out != nullptr);
  return guarded([&] {
    auto dataset = maxfeat::load_dataset(config->value.resolved_data_path(), config->value.ingest);
    *out = new mf_dataset{std::move(dataset)};
  });
}

mf_status mf_dataset_info_get(const mf_dataset* dataset, mf_dataset_info* info) {
  MF_REQUIRE(dataset != nullptr && info != nullptr);
  return guarded([&] {
    const auto& d = dataset->value;
    info->n_users = d.n_users();
    info->n_items = d.n_items();
    info->n_features = d.n_features();
    info->n_interactions = d.interactions.nonZeros();
    info->n_feature_entries = d.features.nonZeros();
    const maxfeat::Vector pops = maxfeat::column_sums(d.interactions);
    info->n_cold_items = (pops.array() == 0.0).count();
    info->n_empty_items = 0;
    for (maxfeat::Index i = 0; i < d.features.rows(); ++i)
      if (d.features.outerIndexPtr()[i + 1] == d.features.outerIndexPtr()[i]) ++info->n_empty_items;
  });
}

mf_status mf_dataset_write(const mf_dataset* dataset, const char* dir) {
  MF_REQUIRE(dataset != nullptr && dir != nullptr);
  return guarded([&] { maxfeat::write_dataset(dataset->value, dir); });
}

void mf_dataset_free(mf_dataset* dataset) { delete dataset; }

void mf_planted_defaults(mf_planted_params* params) {
  if (params == nullptr) return;
  const maxfeat::PlantedParams d;
  *params = {d.n_items,       d.n_features,     d.n_planted,          d.planted_per_item, d.noise_per_item,
             d.n_users,       d.likes_per_user, d.interactions_per_user, d.noise_skew,   d.seed};
}

mf_status mf_synthetic_generate(const mf_planted_params* params, mf_dataset** out, int64_t* planted,
                                size_t capacity, size_t* n_planted) {
  MF_REQUIRE(params != nullptr && out != nullptr);
  MF_REQUIRE(planted != nullptr || capacity == 0);
  return guarded([&] {
    maxfeat::PlantedParams p;
    p.n_items = params->n_items;
    p.n_features = params->n_features;
    p.n_planted = params->n_planted;
    p.planted_per_item = params->planted_per_item;
    p.noise_per_item = params->noise_per_item;
    p.n_users = params->n_users;
    p.likes_per_user = params->likes_per_user;
    p.interactions_per_user = params->interactions_per_user;
    p.noise_skew = params->noise_skew;
    p.seed = params->seed;
    auto generated = maxfeat::generate_planted(p);
    for (std::size_t t = 0; t < std::min(capacity, generated.planted.size()); ++t) planted[t] = generated.planted[t];
    if (n_planted) *n_planted = generated.planted.size();
    *out = new mf_dataset{std::move(generated.dataset)};
  });
}

mf_status mf_select(const mf_config* config, const mf_dataset* dataset, mf_ranking** out) {
  MF_REQUIRE(config != nullptr && dataset != nullptr && out != nullptr);
  return guarded([&] {
    config->value.validate();
    auto ranking = run_selection(config->value, dataset->value);
    maxfeat::Provenance provenance{maxfeat::config_hash(config->value), config->value.eval.seed,
                                   maxfeat::utc_timestamp()};
    *out = new mf_ranking{std::move(ranking), std::move(provenance)};
  });
}

size_t mf_ranking_size(const mf_ranking* ranking) { return ranking ? ranking->value.order.size() : 0; }

mf_status mf_ranking_order(const mf_ranking* ranking, int64_t* order, size_t capacity) {
  MF_REQUIRE(ranking != nullptr && order != nullptr);
  MF_REQUIRE(capacity >= ranking->value.order.size());
  for (std::size_t t = 0; t < ranking->value.order.size(); ++t) order[t] = ranking->value.order[t];
  return MF_OK;
}

mf_status mf_ranking_method(const mf_ranking* ranking, const char** name) {
  MF_REQUIRE(ranking != nullptr && name != nullptr);
  *name = maxfeat::method_name(ranking->value.method).data();
  return MF_OK;
}

mf_status mf_ranking_to_json(const mf_ranking* ranking, char** out) {
  MF_REQUIRE(ranking != nullptr && out != nullptr);
  return guarded([&] { *out = copy_string(maxfeat::ranking_to_json(ranking->value, ranking->provenance)); });
}

mf_status mf_ranking_write_json(const mf_ranking* ranking, const char* path) {
  MF_REQUIRE(ranking != nullptr && path != nullptr);
  return guarded([&] {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw maxfeat::Error(maxfeat::ErrorCode::kIoError, std::string("cannot write ") + path);
    file << maxfeat::ranking_to_json(ranking->value, ranking->provenance);
  });
}

void mf_ranking_free(mf_ranking* ranking) { delete ranking; }

mf_status mf_embed(const mf_config* config, const mf_dataset* dataset, mf_embeddings** out) {
  MF_REQUIRE(config != nullptr && dataset != nullptr && out != nullptr);
  return guarded([&] {
    maxfeat::MixParams params = config->value.select.mix;
    params.seed = config->value.eval.seed;
    *out = new mf_embeddings{maxfeat::mix(dataset->value, params)};
  });
}

mf_status mf_embeddings_shape(const mf_embeddings* embeddings, int64_t* rows, int64_t* cols,
                              int64_t* effective_rank) {
  MF_REQUIRE(embeddings != nullptr);
  if (rows) *rows = embeddings->value.v.rows();
  if (cols) *cols = embeddings->value.v.cols();
  if (effective_rank) *effective_rank = embeddings->value.effective_rank;
  return MF_OK;
}

mf_status mf_embeddings_write(const mf_embeddings* embeddings, const char* path) {
  MF_REQUIRE(embeddings != nullptr && path != nullptr);
  return guarded([&] { maxfeat::write_embeddings_binary(embeddings->value, path); });
}

void mf_embeddings_free(mf_embeddings* embeddings) { delete embeddings; }

mf_status mf_evaluate(const mf_config* config, const mf_dataset* dataset, mf_report** out) {
  MF_REQUIRE(config != nullptr && dataset != nullptr && out != nullptr);
  return guarded([&] {
    config->value.validate();
    auto report = maxfeat::run_experiment(dataset->value, config->value.eval, config->value.methods);
    report.config_hash = maxfeat::config_hash(config->value);
    *out = new mf_report{std::move(report)};
  });
}

mf_status mf_report_write(const mf_report* report, const char* dir) {
  MF_REQUIRE(report != nullptr && dir != nullptr);
  return guarded([&] { maxfeat::write_report(report->value, dir); });
}

mf_status mf_report_to_json(const mf_report* report, char** out) {
  MF_REQUIRE(report != nullptr && out != nullptr);
  return guarded([&] { *out = copy_string(maxfeat::report_to_json(report->value)); });
}

mf_status mf_report_summary(const mf_report* report, char** out) {
  MF_REQUIRE(report != nullptr && out != nullptr);
  return guarded([&] { *out = copy_string(maxfeat::report_summary(report->value)); });
}

void mf_report_free(mf_report* report) { delete report; }

mf_status mf_stability(const mf_config* config, const mf_dataset* dataset, const char* csv_path,
                       size_t* n_configs) {
  MF_REQUIRE(config != nullptr && dataset != nullptr && csv_path != nullptr);
  return guarded([&] {
    config->value.validate();
    const auto& c = config->value;
    const auto result =
        maxfeat::selection_stability(dataset->value, c.eval.mix, c.eval.maxvol, c.stability_fraction, c.eval.seed);
    const std::filesystem::path path(csv_path);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    maxfeat::write_stability_csv(result, path, maxfeat::config_hash(c));
    if (n_configs) *n_configs = result.labels.size();
  });
}

}  // extern "C"
