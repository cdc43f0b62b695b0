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
#include <string>
#include <string_view>
#include <vector>

#include "maxfeat/baselines.hpp"
#include "maxfeat/dataset.hpp"
#include "maxfeat/evaluation.hpp"
#include "maxfeat/mix.hpp"
#include "maxfeat/ranking.hpp"

namespace maxfeat {

// Parameters of the single-selection command.
struct SelectSettings {
  SelectionMethod method = SelectionMethod::kMaxvol;
  double fraction = 0.10;
  MixParams mix;
  CfecbfParams cfecbf;
};

// Everything a CLI run needs. Relative paths are resolved against base_dir,
// the directory holding the config file.
struct RunConfig {
  std::filesystem::path base_dir = ".";
  std::string data_path = "data";
  IngestConfig ingest;
  EvalConfig eval;
  std::vector<SelectionMethod> methods{SelectionMethod::kMaxvol, SelectionMethod::kRandom,
                                       SelectionMethod::kPopular, SelectionMethod::kCfecbf};
  SelectSettings select;
  double stability_fraction = 0.10;
  std::string output_dir = "out";
  std::string log_level = "info";

  std::filesystem::path resolved_data_path() const;
  std::filesystem::path resolved_output_dir() const;
  void validate() const;
};

// Sections: data, mix, maxvol, cfecbf, model, eval, select, stability, output.
// Values are TOML scalars (numbers, booleans, quoted strings) or flat arrays.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = ".",
                       std::string_view origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);

// Sets "section.key" from a value written in config syntax. Bare words are
// accepted where a string is expected.
void set_config_value(RunConfig& config, std::string_view dotted_key, std::string_view value);

// Reads MAXFEAT_<SECTION>__<KEY> for every known key, e.g. MAXFEAT_EVAL__N_REPEATS=3.
using EnvLookup = std::function<const char*(const char*)>;
void apply_env_overrides(RunConfig& config, const EnvLookup& lookup);
void apply_env_overrides(RunConfig& config);

std::vector<std::string> config_keys();

// Full config in file syntax, one key per line, in a fixed order.
std::string dump_config(const RunConfig& config);

// 16 hex digits of FNV-1a over dump_config, ignoring output location, log
// level and job count (none of which changes results).
std::string config_hash(const RunConfig& config);

}  // namespace maxfeat
