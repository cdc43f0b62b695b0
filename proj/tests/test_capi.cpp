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

#include <doctest.h>

#include <cstdlib>
#include <string>
#include <vector>

#include "maxfeat/maxfeat.h"
#include "test_util.hpp"

namespace {

struct Owned {
  char* text = nullptr;
  ~Owned() { mf_string_free(text); }
  std::string str() const { return text ? text : ""; }
};

const char* kInteractions = "u1\ti0\nu1\ti1\nu2\ti1\n";
const char* kFeatures = "i0\ta\ni1\tb\ni2\tc\n";

mf_config* toy_config(const testutil::TempDir& dir) {
  dir.write("toy/interactions.tsv", kInteractions);
  dir.write("toy/features.tsv", kFeatures);
  const auto path = dir.write("run.toml", "[data]\npath = \"toy\"\nmin_feature_items = 1\n");
  mf_config* config = nullptr;
  REQUIRE(mf_config_load(path.c_str(), &config) == MF_OK);
  return config;
}

}  // namespace

TEST_SUITE("c api") {
  TEST_CASE("status names and version") {
    CHECK(std::string(mf_version()) == "0.3.0");
    CHECK(std::string(mf_status_name(MF_ERR_DATA)) == "data error");
    CHECK(mf_last_error() != nullptr);
  }

  TEST_CASE("config round trip") {
    mf_config* config = nullptr;
    REQUIRE(mf_config_default(&config) == MF_OK);
    CHECK(mf_config_set(config, "eval.n_repeats", "3") == MF_OK);
    CHECK(mf_config_set(config, "eval.bogus", "3") == MF_ERR_CONFIG);
    CHECK(std::string(mf_last_error()).find("bogus") != std::string::npos);
    char hash[17];
    CHECK(mf_config_hash(config, hash, sizeof hash) == MF_OK);
    CHECK(std::string(hash).size() == 16);
    CHECK(mf_config_hash(config, hash, 8) == MF_ERR_INVALID);
    Owned dump;
    CHECK(mf_config_dump(config, &dump.text) == MF_OK);
    CHECK(dump.str().find("n_repeats = 3") != std::string::npos);
    CHECK(mf_config_set(config, "eval.n_repeats", "0") == MF_OK);
    CHECK(mf_config_validate(config) == MF_ERR_CONFIG);
    mf_config_free(config);
  }

  TEST_CASE("null arguments") {
    CHECK(mf_config_default(nullptr) == MF_ERR_INVALID);
    CHECK(mf_select(nullptr, nullptr, nullptr) == MF_ERR_INVALID);
    CHECK(mf_ranking_size(nullptr) == 0);
    mf_config_free(nullptr);
    mf_dataset_free(nullptr);
  }

  TEST_CASE("missing data directory") {
    testutil::TempDir dir;
    const auto path = dir.write("run.toml", "[data]\npath = \"absent\"\n");
    mf_config* config = nullptr;
    REQUIRE(mf_config_load(path.c_str(), &config) == MF_OK);
    mf_dataset* data = nullptr;
    CHECK(mf_dataset_load(config, &data) == MF_ERR_DATA);
    CHECK(std::string(mf_last_error()).find("absent") != std::string::npos);
    CHECK(data == nullptr);
    mf_config_free(config);
  }

  TEST_CASE("popular selection on the toy dataset") {
    testutil::TempDir dir;
    mf_config* config = toy_config(dir);
    mf_dataset* data = nullptr;
    REQUIRE(mf_dataset_load(config, &data) == MF_OK);
    mf_dataset_info info{};
    REQUIRE(mf_dataset_info_get(data, &info) == MF_OK);
    CHECK(info.n_items == 3);
    CHECK(info.n_features == 3);
    CHECK(info.n_interactions == 3);
    CHECK(info.n_cold_items == 1);

    CHECK(mf_config_set(config, "select.method", "popular") == MF_OK);
    CHECK(mf_config_set(config, "select.fraction", "1.0") == MF_OK);
    mf_ranking* ranking = nullptr;
    REQUIRE(mf_select(config, data, &ranking) == MF_OK);
    REQUIRE(mf_ranking_size(ranking) == 3);
    std::vector<int64_t> order(3);
    CHECK(mf_ranking_order(ranking, order.data(), order.size()) == MF_OK);
    CHECK(order == std::vector<int64_t>{1, 0, 2});
    const char* name = nullptr;
    CHECK(mf_ranking_method(ranking, &name) == MF_OK);
    CHECK(std::string(name) == "popular");
    Owned json;
    CHECK(mf_ranking_to_json(ranking, &json.text) == MF_OK);
    CHECK(json.str().find("\"config_hash\"") != std::string::npos);
    CHECK(mf_ranking_order(ranking, order.data(), 2) == MF_ERR_INVALID);
    mf_ranking_free(ranking);
    mf_dataset_free(data);
    mf_config_free(config);
  }

  TEST_CASE("synthetic data, embeddings, evaluation and stability") {
    testutil::TempDir dir;
    mf_planted_params params;
    mf_planted_defaults(&params);
    CHECK(params.n_items == 400);
    params.n_items = 100;
    params.n_features = 50;
    params.n_planted = 8;
    params.planted_per_item = 2;
    params.noise_per_item = 3;
    params.n_users = 200;
    params.interactions_per_user = 10;
    mf_dataset* data = nullptr;
    std::vector<int64_t> planted(8);
    size_t n_planted = 0;
    REQUIRE(mf_synthetic_generate(&params, &data, planted.data(), planted.size(), &n_planted) == MF_OK);
    CHECK(n_planted == 8);

    mf_config* config = nullptr;
    REQUIRE(mf_config_default(&config) == MF_OK);
    CHECK(mf_config_set(config, "select.k", "4") == MF_OK);
    mf_embeddings* emb = nullptr;
    REQUIRE(mf_embed(config, data, &emb) == MF_OK);
    int64_t rows = 0, cols = 0, rank = 0;
    CHECK(mf_embeddings_shape(emb, &rows, &cols, &rank) == MF_OK);
    CHECK(rows == 50);
    CHECK(cols == 4);
    CHECK(mf_embeddings_write(emb, (dir / "e.bin").c_str()) == MF_OK);
    mf_embeddings_free(emb);

    CHECK(mf_config_set(config, "mix.k", "[4]") == MF_OK);
    CHECK(mf_config_set(config, "mix.alpha", "[0.8]") == MF_OK);
    CHECK(mf_config_set(config, "mix.p", "[0.0]") == MF_OK);
    CHECK(mf_config_set(config, "eval.n_repeats", "2") == MF_OK);
    CHECK(mf_config_set(config, "eval.fractions", "[0.2]") == MF_OK);
    CHECK(mf_config_set(config, "eval.methods", "[\"maxvol\", \"random\"]") == MF_OK);
    mf_report* report = nullptr;
    REQUIRE(mf_evaluate(config, data, &report) == MF_OK);
    Owned json, summary;
    CHECK(mf_report_to_json(report, &json.text) == MF_OK);
    CHECK(mf_report_summary(report, &summary.text) == MF_OK);
    char hash[17];
    mf_config_hash(config, hash, sizeof hash);
    CHECK(json.str().find(hash) != std::string::npos);
    CHECK(mf_report_write(report, (dir / "out").c_str()) == MF_OK);
    CHECK(std::filesystem::exists(dir / "out" / "report.json"));
    mf_report_free(report);

    size_t n_configs = 0;
    CHECK(mf_stability(config, data, (dir / "s.csv").c_str(), &n_configs) == MF_OK);
    CHECK(n_configs == 1);

    CHECK(mf_config_set(config, "select.k", "500") == MF_OK);
    CHECK(mf_embed(config, data, &emb) == MF_ERR_NUMERIC);
    mf_dataset_free(data);
    mf_config_free(config);
  }
}
