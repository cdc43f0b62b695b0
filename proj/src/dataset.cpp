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

#include "maxfeat/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "maxfeat/errors.hpp"

namespace maxfeat {
namespace fs = std::filesystem;
namespace {

const std::set<std::string, std::less<>> kHeaderWords = {
    "user", "user_id", "userid", "item", "item_id", "itemid", "feature", "feature_name",
    "value", "rating", "weight", "count", "category", "text", "token"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

char delimiter_for(const fs::path& path, TableFormat format) {
  if (format == TableFormat::kCsv) return ',';
  if (format == TableFormat::kTsv) return '\t';
  return path.extension() == ".csv" ? ',' : '\t';
}

// Splits into at most max_fields fields; the last one keeps the rest of the line.
std::vector<std::string_view> split(std::string_view line, char delim, std::size_t max_fields) {
  std::vector<std::string_view> fields;
  const bool whitespace = delim == '\t' && line.find('\t') == std::string_view::npos;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    if (fields.size() + 1 == max_fields) {
      fields.push_back(trim(line.substr(pos)));
      break;
    }
    std::size_t next;
    if (whitespace) {
      while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
      if (pos == line.size()) break;
      next = pos;
      while (next < line.size() && !std::isspace(static_cast<unsigned char>(line[next]))) ++next;
    } else {
      next = line.find(delim, pos);
      if (next == std::string_view::npos) next = line.size();
    }
    fields.push_back(trim(line.substr(pos, next - pos)));
    pos = next + 1;
  }
  return fields;
}

bool looks_like_header(const std::vector<std::string_view>& fields) {
  for (auto f : fields) {
    std::string lower(f);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (kHeaderWords.count(lower)) return true;
  }
  return false;
}

std::optional<double> parse_number(std::string_view s) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

[[noreturn]] void parse_error(const fs::path& path, std::size_t line_no, const std::string& what) {
  throw Error(ErrorCode::kParseError, path.string() + ":" + std::to_string(line_no) + ": " + what);
}

// Calls row(fields, line_no) for every data line.
template <typename RowFn>
void for_each_row(const fs::path& path, TableFormat format, std::size_t max_fields, RowFn&& row) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  const char delim = delimiter_for(path, format);
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split(line, delim, max_fields);
    if (first) {
      first = false;
      if (looks_like_header(fields)) continue;
    }
    row(fields, line_no);
  }
}

Index item_index(IdTable& items, std::string_view id, bool allow_new, const fs::path& path,
                 std::size_t line_no) {
  if (auto found = items.find(id)) return *found;
  if (!allow_new)
    throw Error(ErrorCode::kUnknownItem, path.string() + ":" + std::to_string(line_no) +
                                             ": item '" + std::string(id) + "' has no interactions");
  return items.intern(id);
}

struct RawFeatures {
  std::vector<Triplet> entries;
  IdTable names;
  std::vector<std::string> categories;
};

// Keeps the columns for which keep(df, total) holds, preserving column order.
FeatureTable finish_features(RawFeatures raw, Index n_items, bool binary,
                             const std::function<bool(Index, double)>& keep) {
  const Index n_cols = raw.names.size();
  SparseMatrix m(n_items, n_cols);
  m.setFromTriplets(raw.entries.begin(), raw.entries.end());
  if (binary)
    for (Index r = 0; r < m.outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(m, r); it; ++it) it.valueRef() = 1.0;
  m.makeCompressed();

  std::vector<Index> df(n_cols, 0);
  std::vector<double> total(n_cols, 0.0);
  for (Index r = 0; r < m.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      if (it.value() > 0.0) ++df[it.col()];
      total[it.col()] += it.value();
    }

  std::vector<Index> remap(n_cols, -1);
  FeatureTable out;
  for (Index j = 0; j < n_cols; ++j) {
    if (!keep(df[j], total[j])) continue;
    remap[j] = static_cast<Index>(out.names.size());
    out.names.push_back(raw.names.names()[j]);
    out.categories.push_back(raw.categories[j]);
  }
  if (out.names.empty()) throw Error(ErrorCode::kEmptyFeatureSpace, "no features survive filtering");

  std::vector<Triplet> kept;
  kept.reserve(m.nonZeros());
  for (Index r = 0; r < m.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(m, r); it; ++it)
      if (remap[it.col()] >= 0) kept.emplace_back(r, remap[it.col()], it.value());
  out.matrix.resize(n_items, static_cast<Index>(out.names.size()));
  out.matrix.setFromTriplets(kept.begin(), kept.end());
  out.matrix.makeCompressed();
  if (std::none_of(out.categories.begin(), out.categories.end(), [](auto& c) { return !c.empty(); }))
    out.categories.clear();
  return out;
}

Index add_feature(RawFeatures& raw, std::string_view name, std::string_view category) {
  const Index before = raw.names.size();
  const Index j = raw.names.intern(name);
  if (j == before) raw.categories.emplace_back(category);
  else if (raw.categories[j].empty()) raw.categories[j] = std::string(category);
  return j;
}

fs::path find_table(const fs::path& dir, const std::string& stem) {
  for (const char* ext : {".tsv", ".csv"}) {
    fs::path p = dir / (stem + ext);
    if (fs::exists(p)) return p;
  }
  return {};
}

void seed_ids(const fs::path& path, IdTable& table) {
  for_each_row(path, TableFormat::kAuto, 1,
               [&](const std::vector<std::string_view>& f, std::size_t) { table.intern(f[0]); });
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

void IngestConfig::validate() const {
  if (min_feature_items < 1) throw Error(ErrorCode::kConfigError, "min_feature_items must be >= 1");
  if (min_token_count < 1) throw Error(ErrorCode::kConfigError, "min_token_count must be >= 1");
}

Index IdTable::intern(std::string_view id) {
  auto [it, inserted] = index_.try_emplace(std::string(id), static_cast<Index>(names_.size()));
  if (inserted) names_.emplace_back(id);
  return it->second;
}

std::optional<Index> IdTable::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SparseMatrix Dataset::interaction_view() const {
  if (!binarize) return interactions;
  SparseMatrix out = interactions;
  for (Index r = 0; r < out.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(out, r); it; ++it) it.valueRef() = 1.0;
  return out;
}

void Dataset::validate() const {
  if (interactions.cols() != features.rows())
    throw Error(ErrorCode::kShapeMismatch, "interaction columns and feature rows disagree");
  if (static_cast<Index>(user_ids.size()) != interactions.rows() ||
      static_cast<Index>(item_ids.size()) != interactions.cols() ||
      static_cast<Index>(feature_names.size()) != features.cols())
    throw Error(ErrorCode::kShapeMismatch, "id tables do not match matrix shapes");
  if (!feature_categories.empty() && feature_categories.size() != feature_names.size())
    throw Error(ErrorCode::kShapeMismatch, "feature category table has the wrong length");
  for (Index r = 0; r < interactions.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(interactions, r); it; ++it)
      if (!(it.value() > 0.0) || !std::isfinite(it.value()))
        throw Error(ErrorCode::kParseError, "interaction values must be positive and finite");
  auto unique = [](std::vector<std::string> ids) {
    std::sort(ids.begin(), ids.end());
    return std::adjacent_find(ids.begin(), ids.end()) == ids.end();
  };
  if (!unique(user_ids) || !unique(item_ids) || !unique(feature_names))
    throw Error(ErrorCode::kParseError, "duplicate ids in dataset tables");
}

namespace {

// Parses interaction rows into triplets against the given id tables.
std::vector<Triplet> read_interactions(const fs::path& path, TableFormat format, IdTable& users,
                                       IdTable& items) {
  std::vector<Triplet> entries;
  for_each_row(path, format, 3, [&](const std::vector<std::string_view>& f, std::size_t line_no) {
    if (f.size() < 2 || f[0].empty() || f[1].empty()) parse_error(path, line_no, "expected user and item");
    double value = 1.0;
    if (f.size() == 3 && !f[2].empty()) {
      auto parsed = parse_number(f[2]);
      if (!parsed) parse_error(path, line_no, "bad interaction value '" + std::string(f[2]) + "'");
      value = *parsed;
    }
    if (!(value > 0.0)) return;
    const Index u = users.intern(f[0]);
    const Index i = items.intern(f[1]);
    entries.emplace_back(u, i, value);
  });
  return entries;
}

SparseMatrix build(Index rows, Index cols, const std::vector<Triplet>& entries) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(entries.begin(), entries.end());
  m.makeCompressed();
  return m;
}

}  // namespace

InteractionTable load_interactions(const fs::path& path, TableFormat format) {
  InteractionTable out;
  auto entries = read_interactions(path, format, out.users, out.items);
  if (entries.empty()) throw Error(ErrorCode::kEmptyDataset, path.string() + " has no interactions");
  out.matrix = build(out.users.size(), out.items.size(), entries);
  return out;
}

FeatureTable load_categorical_features(const fs::path& path, const IngestConfig& cfg, IdTable& items) {
  cfg.validate();
  RawFeatures raw;
  for_each_row(path, cfg.format, 3, [&](const std::vector<std::string_view>& f, std::size_t line_no) {
    if (f.size() < 2 || f[0].empty() || f[1].empty()) parse_error(path, line_no, "expected item and feature");
    const Index i = item_index(items, f[0], cfg.allow_new_items, path, line_no);
    const Index j = add_feature(raw, f[1], f.size() == 3 ? f[2] : std::string_view{});
    raw.entries.emplace_back(i, j, 1.0);
  });
  if (raw.entries.empty()) throw Error(ErrorCode::kEmptyFeatureSpace, path.string() + " has no features");
  const Index min_items = cfg.min_feature_items;
  return finish_features(std::move(raw), items.size(), true,
                         [min_items](Index df, double) { return df >= min_items; });
}

FeatureTable load_textual_features(const fs::path& path, const IngestConfig& cfg, IdTable& items) {
  cfg.validate();
  RawFeatures raw;
  for_each_row(path, cfg.format, 2, [&](const std::vector<std::string_view>& f, std::size_t line_no) {
    if (f.empty() || f[0].empty()) parse_error(path, line_no, "expected item and text");
    const Index i = item_index(items, f[0], cfg.allow_new_items, path, line_no);
    if (f.size() < 2) return;
    for (const auto& token : tokenize(f[1])) raw.entries.emplace_back(i, add_feature(raw, token, {}), 1.0);
  });
  if (raw.entries.empty()) throw Error(ErrorCode::kEmptyFeatureSpace, path.string() + " has no tokens");
  const auto min_count = static_cast<double>(cfg.min_token_count);
  return finish_features(std::move(raw), items.size(), false,
                         [min_count](Index, double total) { return total >= min_count; });
}

FeatureTable load_weighted_features(const fs::path& path, const IngestConfig& cfg, IdTable& items) {
  cfg.validate();
  RawFeatures raw;
  for_each_row(path, cfg.format, 3, [&](const std::vector<std::string_view>& f, std::size_t line_no) {
    if (f.size() < 3 || f[0].empty() || f[1].empty()) parse_error(path, line_no, "expected item, feature, value");
    auto value = parse_number(f[2]);
    if (!value || *value < 0.0) parse_error(path, line_no, "bad feature value '" + std::string(f[2]) + "'");
    const Index i = item_index(items, f[0], cfg.allow_new_items, path, line_no);
    const Index j = add_feature(raw, f[1], {});
    if (*value > 0.0) raw.entries.emplace_back(i, j, *value);
  });
  if (raw.entries.empty()) throw Error(ErrorCode::kEmptyFeatureSpace, path.string() + " has no features");
  const Index min_items = cfg.min_feature_items;
  return finish_features(std::move(raw), items.size(), false,
                         [min_items](Index df, double) { return df >= min_items; });
}

Dataset load_dataset(const fs::path& dir, const IngestConfig& cfg) {
  cfg.validate();
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIoError, "dataset directory not found: " + dir.string());
  const fs::path interactions_path = find_table(dir, "interactions");
  const fs::path features_path = find_table(dir, "features");
  if (interactions_path.empty()) throw Error(ErrorCode::kIoError, "missing interactions table in " + dir.string());
  if (features_path.empty()) throw Error(ErrorCode::kIoError, "missing features table in " + dir.string());

  IdTable users, items;
  if (auto p = find_table(dir, "users"); !p.empty()) seed_ids(p, users);
  if (auto p = find_table(dir, "items"); !p.empty()) seed_ids(p, items);

  auto entries = read_interactions(interactions_path, cfg.format, users, items);
  if (entries.empty()) throw Error(ErrorCode::kEmptyDataset, interactions_path.string() + " has no interactions");

  FeatureTable features;
  switch (cfg.mode) {
    case FeatureMode::kCategorical: features = load_categorical_features(features_path, cfg, items); break;
    case FeatureMode::kTextual: features = load_textual_features(features_path, cfg, items); break;
    case FeatureMode::kWeighted: features = load_weighted_features(features_path, cfg, items); break;
  }

  // Seeded users without interactions are dropped.
  std::vector<Index> user_remap(users.size(), -1);
  std::vector<std::string> user_ids;
  for (const auto& t : entries)
    if (user_remap[t.row()] < 0) user_remap[t.row()] = 0;
  for (Index u = 0; u < users.size(); ++u)
    if (user_remap[u] >= 0) {
      user_remap[u] = static_cast<Index>(user_ids.size());
      user_ids.push_back(users.names()[u]);
    }
  for (auto& t : entries) t = Triplet(user_remap[t.row()], t.col(), t.value());

  Dataset out;
  out.interactions = build(static_cast<Index>(user_ids.size()), items.size(), entries);
  out.features = std::move(features.matrix);
  out.features.conservativeResize(items.size(), out.features.cols());
  out.features.makeCompressed();
  out.user_ids = std::move(user_ids);
  out.item_ids = items.names();
  out.feature_names = std::move(features.names);
  out.feature_categories = std::move(features.categories);
  out.binarize = cfg.binarize;

  if (auto p = find_table(dir, "categories"); !p.empty()) {
    std::unordered_map<std::string, std::string> labels;
    for_each_row(p, TableFormat::kAuto, 2, [&](const std::vector<std::string_view>& f, std::size_t line_no) {
      if (f.size() < 2) parse_error(p, line_no, "expected feature and category");
      labels.try_emplace(std::string(f[0]), std::string(f[1]));
    });
    out.feature_categories.assign(out.feature_names.size(), std::string());
    for (std::size_t j = 0; j < out.feature_names.size(); ++j)
      if (auto it = labels.find(out.feature_names[j]); it != labels.end()) out.feature_categories[j] = it->second;
  }
  out.validate();
  return out;
}

void write_dataset(const Dataset& dataset, const fs::path& dir) {
  dataset.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + (dir / name).string());
    return out;
  };

  {
    auto out = open("users.tsv");
    out << "user\n";
    for (const auto& u : dataset.user_ids) out << u << '\n';
  }
  {
    auto out = open("items.tsv");
    out << "item\n";
    for (const auto& i : dataset.item_ids) out << i << '\n';
  }
  {
    auto out = open("interactions.tsv");
    out << "user\titem\tvalue\n";
    const auto& r = dataset.interactions;
    for (Index u = 0; u < r.outerSize(); ++u)
      for (SparseMatrix::InnerIterator it(r, u); it; ++it)
        out << dataset.user_ids[u] << '\t' << dataset.item_ids[it.col()] << '\t' << format_number(it.value())
            << '\n';
  }
  {
    // Column-major so that first-appearance order reproduces feature order.
    auto out = open("features.tsv");
    out << "item\tfeature\tvalue\n";
    const Eigen::SparseMatrix<double, Eigen::ColMajor> f = dataset.features;
    for (Index j = 0; j < f.outerSize(); ++j)
      for (Eigen::SparseMatrix<double, Eigen::ColMajor>::InnerIterator it(f, j); it; ++it)
        out << dataset.item_ids[it.row()] << '\t' << dataset.feature_names[j] << '\t'
            << format_number(it.value()) << '\n';
  }
  if (!dataset.feature_categories.empty()) {
    auto out = open("categories.tsv");
    out << "feature\tcategory\n";
    for (std::size_t j = 0; j < dataset.feature_names.size(); ++j)
      if (!dataset.feature_categories[j].empty())
        out << dataset.feature_names[j] << '\t' << dataset.feature_categories[j] << '\n';
  }
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.size() >= 2) tokens.push_back(current);
    current.clear();
  };
  for (unsigned char c : text) {
    if (std::isalnum(c) || c >= 0x80) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

}  // namespace maxfeat
