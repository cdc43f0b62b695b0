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

// Command-line front end. Talks to the library only through maxfeat.h.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "maxfeat/maxfeat.h"

namespace {

struct Failure {
  int code;
};

void check(mf_status status, const char* what) {
  if (status == MF_OK) return;
  spdlog::error("{}: {}", what, mf_last_error());
  throw Failure{status == MF_ERR_INVALID ? 1 : static_cast<int>(status)};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using ConfigPtr = std::unique_ptr<mf_config, Deleter<mf_config, mf_config_free>>;
using DatasetPtr = std::unique_ptr<mf_dataset, Deleter<mf_dataset, mf_dataset_free>>;
using RankingPtr = std::unique_ptr<mf_ranking, Deleter<mf_ranking, mf_ranking_free>>;
using ReportPtr = std::unique_ptr<mf_report, Deleter<mf_report, mf_report_free>>;

std::string take_string(char* raw) {
  std::string out = raw ? raw : "";
  mf_string_free(raw);
  return out;
}

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string out;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_jobs) {
  cmd->add_option("-c,--config", opts.config_path, "config file (TOML subset)")->required();
  cmd->add_option("--seed", opts.seed, "override eval.seed");
  if (with_jobs) cmd->add_option("--jobs", opts.jobs, "worker threads for repeats; 1 runs serially")->check(CLI::PositiveNumber);
  cmd->add_option("--out", opts.out, "output directory (overrides output.dir)");
  cmd->add_option("--set", opts.overrides, "section.key=value override, repeatable");
}

void set_value(mf_config* cfg, const std::string& key, const std::string& value) {
  check(mf_config_set(cfg, key.c_str(), value.c_str()), ("option " + key).c_str());
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

void apply_log_level(const std::string& level) {
  spdlog::set_level(spdlog::level::from_str(level));
}

ConfigPtr load_config(const CommonOptions& opts) {
  mf_config* raw = nullptr;
  check(mf_config_load(opts.config_path.c_str(), &raw), "config");
  ConfigPtr cfg(raw);
  check(mf_config_apply_env(cfg.get()), "environment");
  for (const auto& o : opts.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) {
      spdlog::error("--set expects section.key=value, got '{}'", o);
      throw Failure{MF_ERR_CONFIG};
    }
    set_value(cfg.get(), o.substr(0, eq), o.substr(eq + 1));
  }
  if (opts.seed) set_value(cfg.get(), "eval.seed", std::to_string(*opts.seed));
  if (opts.jobs) set_value(cfg.get(), "eval.jobs", std::to_string(*opts.jobs));
  if (!opts.out.empty()) set_value(cfg.get(), "output.dir", quoted(std::filesystem::absolute(opts.out).string()));
  check(mf_config_validate(cfg.get()), "config");

  const std::string dump = take_string([&] {
    char* s = nullptr;
    check(mf_config_dump(cfg.get(), &s), "config");
    return s;
  }());
  const auto pos = dump.find("log_level = \"");
  if (pos != std::string::npos) {
    const auto start = pos + 13;
    apply_log_level(dump.substr(start, dump.find('"', start) - start));
  }
  char hash[17];
  check(mf_config_hash(cfg.get(), hash, sizeof hash), "config");
  spdlog::info("config {} (hash {})", opts.config_path, hash);
  return cfg;
}

std::pair<std::string, std::string> paths(const mf_config* cfg) {
  char* data = nullptr;
  char* out = nullptr;
  check(mf_config_paths(cfg, &data, &out), "config");
  return {take_string(data), take_string(out)};
}

DatasetPtr load_dataset(const mf_config* cfg) {
  const auto [data_dir, _] = paths(cfg);
  spdlog::info("loading dataset from {}", data_dir);
  mf_dataset* raw = nullptr;
  check(mf_dataset_load(cfg, &raw), "dataset");
  DatasetPtr dataset(raw);
  mf_dataset_info info{};
  check(mf_dataset_info_get(dataset.get(), &info), "dataset");
  spdlog::info("{} users, {} items, {} features, {} interactions", info.n_users, info.n_items, info.n_features,
               info.n_interactions);
  return dataset;
}

std::filesystem::path ensure_output_dir(const mf_config* cfg) {
  const std::filesystem::path dir = paths(cfg).second;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    spdlog::error("cannot create output directory {}: {}", dir.string(), ec.message());
    throw Failure{MF_ERR_DATA};
  }
  return dir;
}

int cmd_select(const CommonOptions& opts, const std::string& method, std::optional<double> fraction) {
  auto cfg = load_config(opts);
  if (!method.empty()) set_value(cfg.get(), "select.method", quoted(method));
  if (fraction) set_value(cfg.get(), "select.fraction", std::to_string(*fraction));
  check(mf_config_validate(cfg.get()), "config");
  auto dataset = load_dataset(cfg.get());
  mf_ranking* raw = nullptr;
  check(mf_select(cfg.get(), dataset.get(), &raw), "select");
  RankingPtr ranking(raw);
  const char* name = nullptr;
  check(mf_ranking_method(ranking.get(), &name), "select");
  const auto path = ensure_output_dir(cfg.get()) / (std::string("ranking_") + name + ".json");
  check(mf_ranking_write_json(ranking.get(), path.string().c_str()), "write");
  spdlog::info("selected {} features with {} -> {}", mf_ranking_size(ranking.get()), name, path.string());
  std::cout << path.string() << '\n';
  return 0;
}

int cmd_evaluate(const CommonOptions& opts) {
  auto cfg = load_config(opts);
  auto dataset = load_dataset(cfg.get());
  mf_report* raw = nullptr;
  spdlog::info("running experiment");
  check(mf_evaluate(cfg.get(), dataset.get(), &raw), "evaluate");
  ReportPtr report(raw);
  const auto dir = ensure_output_dir(cfg.get());
  check(mf_report_write(report.get(), dir.string().c_str()), "write");
  char* summary = nullptr;
  check(mf_report_summary(report.get(), &summary), "summary");
  std::cout << take_string(summary);
  spdlog::info("report written to {}", dir.string());
  return 0;
}

int cmd_stability(const CommonOptions& opts) {
  auto cfg = load_config(opts);
  auto dataset = load_dataset(cfg.get());
  const auto path = ensure_output_dir(cfg.get()) / "stability.csv";
  std::size_t n = 0;
  check(mf_stability(cfg.get(), dataset.get(), path.string().c_str(), &n), "stability");
  spdlog::info("{}x{} Jaccard matrix written to {}", n, n, path.string());
  std::cout << path.string() << '\n';
  return 0;
}

int cmd_ingest_check(const CommonOptions& opts) {
  auto cfg = load_config(opts);
  auto dataset = load_dataset(cfg.get());
  mf_dataset_info info{};
  check(mf_dataset_info_get(dataset.get(), &info), "dataset");
  const double density = info.n_users > 0 && info.n_items > 0
                             ? static_cast<double>(info.n_interactions) /
                                   (static_cast<double>(info.n_users) * static_cast<double>(info.n_items))
                             : 0.0;
  std::printf("users\t%lld\nitems\t%lld\nfeatures\t%lld\ninteractions\t%lld\nfeature_entries\t%lld\n",
              static_cast<long long>(info.n_users), static_cast<long long>(info.n_items),
              static_cast<long long>(info.n_features), static_cast<long long>(info.n_interactions),
              static_cast<long long>(info.n_feature_entries));
  std::printf("cold_items\t%lld\nitems_without_features\t%lld\ndensity\t%.6g\n",
              static_cast<long long>(info.n_cold_items), static_cast<long long>(info.n_empty_items), density);
  return 0;
}

int cmd_synth(const mf_planted_params& params, const std::string& out) {
  mf_dataset* raw = nullptr;
  std::vector<int64_t> planted(static_cast<std::size_t>(std::max<int64_t>(params.n_planted, 0)));
  std::size_t n_planted = 0;
  check(mf_synthetic_generate(&params, &raw, planted.data(), planted.size(), &n_planted), "synth");
  DatasetPtr dataset(raw);
  check(mf_dataset_write(dataset.get(), out.c_str()), "write");
  spdlog::info("planted dataset written to {} ({} planted features)", out, n_planted);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("maxfeat");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");

  CLI::App app{"Collaborative-importance feature selection for cold-start recommenders"};
  app.set_version_flag("--version", std::string(mf_version()));
  app.require_subcommand(1);

  CommonOptions opts;
  std::string method;
  std::optional<double> fraction;

  auto* select = app.add_subcommand("select", "rank features with one selector and write the ranking JSON");
  add_common(select, opts, false);
  select->add_option("--method", method, "maxvol, random, popular, cfecbf or norm (overrides select.method)");
  select->add_option("--fraction", fraction, "share of features to keep (overrides select.fraction)");

  auto* evaluate = app.add_subcommand("evaluate", "run the cold-start experiment and write the report");
  add_common(evaluate, opts, true);

  auto* stability = app.add_subcommand("stability", "Jaccard matrix of maxvol selections across the mix grid");
  add_common(stability, opts, false);

  auto* ingest = app.add_subcommand("ingest-check", "load the dataset and print its shape");
  add_common(ingest, opts, false);

  mf_planted_params planted{};
  mf_planted_defaults(&planted);
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "write a planted synthetic dataset");
  synth->add_option("--out", synth_out, "dataset directory")->required();
  synth->add_option("--items", planted.n_items);
  synth->add_option("--features", planted.n_features);
  synth->add_option("--planted", planted.n_planted);
  synth->add_option("--users", planted.n_users);
  synth->add_option("--noise-skew", planted.noise_skew);
  synth->add_option("--seed", planted.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*select) return cmd_select(opts, method, fraction);
    if (*evaluate) return cmd_evaluate(opts);
    if (*stability) return cmd_stability(opts);
    if (*ingest) return cmd_ingest_check(opts);
    if (*synth) return cmd_synth(planted, synth_out);
  } catch (const Failure& f) {
    return f.code;
  }
  return 1;
}
