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

#ifndef MAXFEAT_MAXFEAT_H_
#define MAXFEAT_MAXFEAT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MF_API __declspec(dllexport)
#else
#define MF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. The numeric values of the CONFIG, DATA and NUMERIC classes are
   also the exit codes of the command-line tool. */
typedef enum mf_status {
  MF_OK = 0,
  MF_ERR_INVALID = 1,
  MF_ERR_CONFIG = 2,
  MF_ERR_DATA = 3,
  MF_ERR_NUMERIC = 4,
  MF_ERR_INTERNAL = 5
} mf_status;

typedef struct mf_config mf_config;
typedef struct mf_dataset mf_dataset;
typedef struct mf_ranking mf_ranking;
typedef struct mf_embeddings mf_embeddings;
typedef struct mf_report mf_report;

MF_API const char* mf_version(void);
MF_API const char* mf_status_name(mf_status status);
/* Message of the most recent failure on the calling thread; never NULL. */
MF_API const char* mf_last_error(void);
/* Releases strings returned through char** out-parameters. */
MF_API void mf_string_free(char* text);

/* ---- configuration ---- */
MF_API mf_status mf_config_default(mf_config** out);
MF_API mf_status mf_config_load(const char* path, mf_config** out);
/* key is "section.key", value uses config-file syntax, e.g. "[0.2, 0.8]". */
MF_API mf_status mf_config_set(mf_config* config, const char* key, const char* value);
/* Applies MAXFEAT_<SECTION>__<KEY> environment variables. */
MF_API mf_status mf_config_apply_env(mf_config* config);
MF_API mf_status mf_config_validate(const mf_config* config);
/* Writes 16 hex digits plus a terminator; buffer must hold 17 bytes. */
MF_API mf_status mf_config_hash(const mf_config* config, char* buffer, size_t size);
MF_API mf_status mf_config_dump(const mf_config* config, char** out);
/* Resolved dataset directory and output directory. */
MF_API mf_status mf_config_paths(const mf_config* config, char** data_dir, char** output_dir);
MF_API void mf_config_free(mf_config* config);

/* ---- datasets ---- */
typedef struct mf_dataset_info {
  int64_t n_users;
  int64_t n_items;
  int64_t n_features;
  int64_t n_interactions;
  int64_t n_feature_entries;
  int64_t n_cold_items; /* items without interactions */
  int64_t n_empty_items; /* items without features */
} mf_dataset_info;

/* Loads the dataset named by data.path using the [data] options. */
MF_API mf_status mf_dataset_load(const mf_config* config, mf_dataset** out);
MF_API mf_status mf_dataset_info_get(const mf_dataset* dataset, mf_dataset_info* info);
/* Writes a directory that reloads with data.mode = "weighted". */
MF_API mf_status mf_dataset_write(const mf_dataset* dataset, const char* dir);
MF_API void mf_dataset_free(mf_dataset* dataset);

typedef struct mf_planted_params {
  int64_t n_items;
  int64_t n_features;
  int64_t n_planted;
  int64_t planted_per_item;
  int64_t noise_per_item;
  int64_t n_users;
  int64_t likes_per_user;
  int64_t interactions_per_user;
  double noise_skew;
  uint64_t seed;
} mf_planted_params;

MF_API void mf_planted_defaults(mf_planted_params* params);
/* Generates a dataset whose planted feature indices are copied into
   `planted` (capacity `capacity`); `n_planted` receives their count. */
MF_API mf_status mf_synthetic_generate(const mf_planted_params* params, mf_dataset** out, int64_t* planted,
                                       size_t capacity, size_t* n_planted);

/* ---- selection ---- */
/* Ranks features with the [select] settings on the full dataset. The ranking
   holds round(select.fraction * n_features) entries (at least one); maxvol
   rankings hold at least select.k entries. */
MF_API mf_status mf_select(const mf_config* config, const mf_dataset* dataset, mf_ranking** out);
MF_API size_t mf_ranking_size(const mf_ranking* ranking);
MF_API mf_status mf_ranking_order(const mf_ranking* ranking, int64_t* order, size_t capacity);
MF_API mf_status mf_ranking_method(const mf_ranking* ranking, const char** name);
/* JSON with a provenance header: config hash, seed and creation time. */
MF_API mf_status mf_ranking_to_json(const mf_ranking* ranking, char** out);
MF_API mf_status mf_ranking_write_json(const mf_ranking* ranking, const char* path);
MF_API void mf_ranking_free(mf_ranking* ranking);

/* Mix-step embeddings for select.alpha, select.p and select.k. */
MF_API mf_status mf_embed(const mf_config* config, const mf_dataset* dataset, mf_embeddings** out);
MF_API mf_status mf_embeddings_shape(const mf_embeddings* embeddings, int64_t* rows, int64_t* cols,
                                     int64_t* effective_rank);
MF_API mf_status mf_embeddings_write(const mf_embeddings* embeddings, const char* path);
MF_API void mf_embeddings_free(mf_embeddings* embeddings);

/* ---- evaluation ---- */
MF_API mf_status mf_evaluate(const mf_config* config, const mf_dataset* dataset, mf_report** out);
/* report.json, results.csv, aggregates.csv, improvement.csv, timings.csv */
MF_API mf_status mf_report_write(const mf_report* report, const char* dir);
MF_API mf_status mf_report_to_json(const mf_report* report, char** out);
MF_API mf_status mf_report_summary(const mf_report* report, char** out);
MF_API void mf_report_free(mf_report* report);

/* Jaccard matrix of maxvol selections across the [mix] grid at
   stability.fraction, written as a labeled CSV. */
MF_API mf_status mf_stability(const mf_config* config, const mf_dataset* dataset, const char* csv_path,
                              size_t* n_configs);

#ifdef __cplusplus
}
#endif

#endif  // MAXFEAT_MAXFEAT_H_
