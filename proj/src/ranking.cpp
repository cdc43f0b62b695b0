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

#include "maxfeat/ranking.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <numeric>

#include <json.hpp>

#include "maxfeat/errors.hpp"

namespace maxfeat {

std::string_view method_name(SelectionMethod method) {
  switch (method) {
    case SelectionMethod::kMaxvol: return "maxvol";
    case SelectionMethod::kRandom: return "random";
    case SelectionMethod::kPopular: return "popular";
    case SelectionMethod::kCfecbf: return "cfecbf";
    case SelectionMethod::kNorm: return "norm";
    case SelectionMethod::kAll: return "all";
  }
  return "unknown";
}

std::optional<SelectionMethod> parse_method(std::string_view name) {
  for (auto m : {SelectionMethod::kMaxvol, SelectionMethod::kRandom, SelectionMethod::kPopular,
                 SelectionMethod::kCfecbf, SelectionMethod::kNorm, SelectionMethod::kAll})
    if (method_name(m) == name) return m;
  return std::nullopt;
}

std::vector<Index> FeatureRanking::prefix(Index n) const {
  if (n < 0 || n > size())
    throw Error(ErrorCode::kNSelectOutOfRange,
                "requested " + std::to_string(n) + " features from a ranking of " + std::to_string(size()));
  return {order.begin(), order.begin() + n};
}

void FeatureRanking::validate() const {
  if (size() > n_features) throw Error(ErrorCode::kShapeMismatch, "ranking longer than the feature space");
  std::vector<bool> seen(static_cast<std::size_t>(n_features), false);
  for (Index j : order) {
    if (j < 0 || j >= n_features) throw Error(ErrorCode::kShapeMismatch, "ranking index out of range");
    if (seen[j]) throw Error(ErrorCode::kShapeMismatch, "ranking index repeated");
    seen[j] = true;
  }
  if (!scores.empty() && scores.size() != order.size())
    throw Error(ErrorCode::kShapeMismatch, "ranking scores misaligned with order");
}

FeatureRanking identity_ranking(Index n_features) {
  FeatureRanking r;
  r.method = SelectionMethod::kAll;
  r.n_features = n_features;
  r.order.resize(static_cast<std::size_t>(n_features));
  std::iota(r.order.begin(), r.order.end(), Index{0});
  return r;
}

std::string ranking_to_json(const FeatureRanking& ranking, const std::optional<Provenance>& provenance) {
  nlohmann::ordered_json j;
  if (provenance) {
    j["provenance"] = {{"config_hash", provenance->config_hash},
                       {"seed", provenance->seed},
                       {"created_at", provenance->created_at}};
  }
  j["method"] = method_name(ranking.method);
  j["n_select"] = ranking.size();
  j["n_features"] = ranking.n_features;
  j["order"] = ranking.order;
  auto scores = nlohmann::ordered_json::array();
  for (double s : ranking.scores) {
    if (std::isfinite(s)) scores.push_back(s);
    else scores.push_back(nullptr);
  }
  j["scores"] = std::move(scores);
  j["converged"] = ranking.converged;
  return j.dump(2) + "\n";
}

FeatureRanking ranking_from_json(std::string_view text) {
  try {
    auto j = nlohmann::json::parse(text);
    FeatureRanking r;
    auto method = parse_method(j.at("method").get<std::string>());
    if (!method) throw Error(ErrorCode::kParseError, "unknown ranking method");
    r.method = *method;
    r.n_features = j.at("n_features").get<Index>();
    r.order = j.at("order").get<std::vector<Index>>();
    for (const auto& s : j.at("scores")) r.scores.push_back(s.is_null() ? kUnscored : s.get<double>());
    r.converged = j.value("converged", true);
    r.validate();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("ranking JSON: ") + e.what());
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace maxfeat
