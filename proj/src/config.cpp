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

#include "maxfeat/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "maxfeat/errors.hpp"

namespace maxfeat {
namespace {

struct Value {
  enum class Kind { kBool, kNumber, kString, kArray } kind = Kind::kString;
  bool boolean = false;
  std::string text;  // number spelling or string contents
  bool bare = false;  // unquoted word
  std::vector<Value> items;
};

[[noreturn]] void fail(const std::string& message) { throw Error(ErrorCode::kConfigError, message); }

class ValueParser {
 public:
  explicit ValueParser(std::string_view text) : text_(text) {}

  Value parse_document_value() {
    skip_space();
    Value v = parse_value(true);
    skip_space();
    if (pos_ < text_.size() && text_[pos_] != '#') fail("unexpected trailing text '" + std::string(text_.substr(pos_)) + "'");
    return v;
  }

 private:
  void skip_space(bool newlines = false) {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || (newlines && c == '\n')) {
        ++pos_;
      } else if (newlines && c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  Value parse_value(bool top) {
    if (pos_ >= text_.size()) fail("missing value");
    const char c = text_[pos_];
    if (c == '[') return parse_array();
    if (c == '"' || c == '\'') return parse_string(c);
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ']' && text_[pos_] != '#' &&
           text_[pos_] != '\n' && (top || (text_[pos_] != ' ' && text_[pos_] != '\t')))
      ++pos_;
    std::string word(text_.substr(start, pos_ - start));
    while (!word.empty() && std::isspace(static_cast<unsigned char>(word.back()))) word.pop_back();
    if (word.empty()) fail("missing value");
    Value v;
    if (word == "true" || word == "false") {
      v.kind = Value::Kind::kBool;
      v.boolean = word == "true";
      return v;
    }
    std::string digits = word;
    std::erase(digits, '_');
    double parsed = 0.0;
    const char* first = digits.data() + (digits.front() == '+' ? 1 : 0);
    const auto [end, ec] = std::from_chars(first, digits.data() + digits.size(), parsed);
    if (ec == std::errc() && end == digits.data() + digits.size()) {
      v.kind = Value::Kind::kNumber;
      v.text = std::string(first, end);
      return v;
    }
    v.kind = Value::Kind::kString;
    v.text = word;
    v.bare = true;
    return v;
  }

  Value parse_string(char quote) {
    ++pos_;
    Value v;
    v.kind = Value::Kind::kString;
    while (pos_ < text_.size() && text_[pos_] != quote) {
      char c = text_[pos_++];
      if (c == '\n') fail("unterminated string");
      if (quote == '"' && c == '\\') {
        if (pos_ >= text_.size()) fail("unterminated string");
        const char e = text_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '\\': c = '\\'; break;
          case '"': c = '"'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      }
      v.text.push_back(c);
    }
    if (pos_ >= text_.size()) fail("unterminated string");
    ++pos_;
    return v;
  }

  Value parse_array() {
    ++pos_;
    Value v;
    v.kind = Value::Kind::kArray;
    skip_space(true);
    while (pos_ < text_.size() && text_[pos_] != ']') {
      v.items.push_back(parse_value(false));
      if (v.items.back().kind == Value::Kind::kArray) fail("nested arrays are not supported");
      skip_space(true);
      if (pos_ < text_.size() && text_[pos_] == ',') {
        ++pos_;
        skip_space(true);
      } else if (pos_ < text_.size() && text_[pos_] != ']') {
        fail("expected ',' or ']' in array");
      }
    }
    if (pos_ >= text_.size()) fail("unterminated array");
    ++pos_;
    return v;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

Value parse_value_text(std::string_view text) { return ValueParser(text).parse_document_value(); }

double as_double(const Value& v) {
  if (v.kind != Value::Kind::kNumber) fail("expected a number");
  double out = 0.0;
  std::from_chars(v.text.data(), v.text.data() + v.text.size(), out);
  return out;
}

Index as_index(const Value& v) {
  if (v.kind != Value::Kind::kNumber) fail("expected an integer");
  long long out = 0;
  const auto [end, ec] = std::from_chars(v.text.data(), v.text.data() + v.text.size(), out);
  if (ec != std::errc() || end != v.text.data() + v.text.size()) fail("expected an integer, got " + v.text);
  return static_cast<Index>(out);
}

std::uint64_t as_u64(const Value& v) {
  if (v.kind != Value::Kind::kNumber) fail("expected a nonnegative integer");
  std::uint64_t out = 0;
  const auto [end, ec] = std::from_chars(v.text.data(), v.text.data() + v.text.size(), out);
  if (ec != std::errc() || end != v.text.data() + v.text.size())
    fail("expected a nonnegative integer, got " + v.text);
  return out;
}

bool as_bool(const Value& v) {
  if (v.kind != Value::Kind::kBool) fail("expected true or false");
  return v.boolean;
}

std::string as_string(const Value& v) {
  if (v.kind == Value::Kind::kArray || v.kind == Value::Kind::kBool) fail("expected a string");
  return v.text;
}

template <typename T, typename F>
std::vector<T> as_list(const Value& v, F convert) {
  std::vector<T> out;
  if (v.kind != Value::Kind::kArray) {
    out.push_back(convert(v));
    return out;
  }
  for (const auto& item : v.items) out.push_back(convert(item));
  return out;
}

SelectionMethod as_method(const Value& v) {
  const std::string name = as_string(v);
  const auto method = parse_method(name);
  if (!method || *method == SelectionMethod::kAll) fail("unknown selection method '" + name + "'");
  return *method;
}

std::string fmt_double(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  return out + "\"";
}

template <typename T, typename F>
std::string fmt_list(const std::vector<T>& values, F format) {
  std::string out = "[";
  for (std::size_t t = 0; t < values.size(); ++t) out += (t ? ", " : "") + format(values[t]);
  return out + "]";
}

std::string fmt_index(Index v) { return std::to_string(v); }

std::string_view mode_name(FeatureMode m) {
  switch (m) {
    case FeatureMode::kCategorical: return "categorical";
    case FeatureMode::kTextual: return "textual";
    case FeatureMode::kWeighted: return "weighted";
  }
  return "categorical";
}

std::string_view format_name(TableFormat f) {
  switch (f) {
    case TableFormat::kAuto: return "auto";
    case TableFormat::kTsv: return "tsv";
    case TableFormat::kCsv: return "csv";
  }
  return "auto";
}

struct KeySpec {
  std::string_view section;
  std::string_view key;
  bool hashed;
  std::function<void(RunConfig&, const Value&)> set;
  std::function<std::string(const RunConfig&)> dump;
};

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = {
      {"data", "path", true, [](RunConfig& c, const Value& v) { c.data_path = as_string(v); },
       [](const RunConfig& c) { return quote(c.data_path); }},
      {"data", "mode", true,
       [](RunConfig& c, const Value& v) {
         const std::string s = as_string(v);
         if (s == "categorical") c.ingest.mode = FeatureMode::kCategorical;
         else if (s == "textual") c.ingest.mode = FeatureMode::kTextual;
         else if (s == "weighted") c.ingest.mode = FeatureMode::kWeighted;
         else fail("unknown feature mode '" + s + "'");
       },
       [](const RunConfig& c) { return quote(mode_name(c.ingest.mode)); }},
      {"data", "format", true,
       [](RunConfig& c, const Value& v) {
         const std::string s = as_string(v);
         if (s == "auto") c.ingest.format = TableFormat::kAuto;
         else if (s == "tsv") c.ingest.format = TableFormat::kTsv;
         else if (s == "csv") c.ingest.format = TableFormat::kCsv;
         else fail("unknown table format '" + s + "'");
       },
       [](const RunConfig& c) { return quote(format_name(c.ingest.format)); }},
      {"data", "min_feature_items", true,
       [](RunConfig& c, const Value& v) { c.ingest.min_feature_items = as_index(v); },
       [](const RunConfig& c) { return fmt_index(c.ingest.min_feature_items); }},
      {"data", "min_token_count", true, [](RunConfig& c, const Value& v) { c.ingest.min_token_count = as_index(v); },
       [](const RunConfig& c) { return fmt_index(c.ingest.min_token_count); }},
      {"data", "binarize", true, [](RunConfig& c, const Value& v) { c.ingest.binarize = as_bool(v); },
       [](const RunConfig& c) { return std::string(c.ingest.binarize ? "true" : "false"); }},
      {"data", "allow_new_items", true, [](RunConfig& c, const Value& v) { c.ingest.allow_new_items = as_bool(v); },
       [](const RunConfig& c) { return std::string(c.ingest.allow_new_items ? "true" : "false"); }},

      {"mix", "alpha", true, [](RunConfig& c, const Value& v) { c.eval.mix.alpha = as_list<double>(v, as_double); },
       [](const RunConfig& c) { return fmt_list(c.eval.mix.alpha, fmt_double); }},
      {"mix", "p", true, [](RunConfig& c, const Value& v) { c.eval.mix.p = as_list<double>(v, as_double); },
       [](const RunConfig& c) { return fmt_list(c.eval.mix.p, fmt_double); }},
      {"mix", "k", true, [](RunConfig& c, const Value& v) { c.eval.mix.k = as_list<Index>(v, as_index); },
       [](const RunConfig& c) { return fmt_list(c.eval.mix.k, fmt_index); }},

      {"maxvol", "tol", true, [](RunConfig& c, const Value& v) { c.eval.maxvol.tol = as_double(v); },
       [](const RunConfig& c) { return fmt_double(c.eval.maxvol.tol); }},
      {"maxvol", "max_iters", true, [](RunConfig& c, const Value& v) { c.eval.maxvol.max_iters = as_index(v); },
       [](const RunConfig& c) { return fmt_index(c.eval.maxvol.max_iters); }},

      {"cfecbf", "lambda1", true,
       [](RunConfig& c, const Value& v) { c.eval.cfecbf.lambda1 = as_list<double>(v, as_double); },
       [](const RunConfig& c) { return fmt_list(c.eval.cfecbf.lambda1, fmt_double); }},
      {"cfecbf", "lambda2", true,
       [](RunConfig& c, const Value& v) { c.eval.cfecbf.lambda2 = as_list<double>(v, as_double); },
       [](const RunConfig& c) { return fmt_list(c.eval.cfecbf.lambda2, fmt_double); }},
      {"cfecbf", "learning_rate", true,
       [](RunConfig& c, const Value& v) { c.eval.cfecbf.learning_rate = as_double(v); },
       [](const RunConfig& c) { return fmt_double(c.eval.cfecbf.learning_rate); }},
      {"cfecbf", "epochs", true, [](RunConfig& c, const Value& v) { c.eval.cfecbf.epochs = as_index(v); },
       [](const RunConfig& c) { return fmt_index(c.eval.cfecbf.epochs); }},

      {"model", "neighbors", true,
       [](RunConfig& c, const Value& v) { c.eval.model.neighbors = as_list<Index>(v, as_index); },
       [](const RunConfig& c) { return fmt_list(c.eval.model.neighbors, fmt_index); }},

      {"eval", "methods", true, [](RunConfig& c, const Value& v) { c.methods = as_list<SelectionMethod>(v, as_method); },
       [](const RunConfig& c) {
         return fmt_list(c.methods, [](SelectionMethod m) { return quote(method_name(m)); });
       }},
      {"eval", "fractions", true,
       [](RunConfig& c, const Value& v) { c.eval.selection_fractions = as_list<double>(v, as_double); },
       [](const RunConfig& c) { return fmt_list(c.eval.selection_fractions, fmt_double); }},
      {"eval", "metric_cutoff", true, [](RunConfig& c, const Value& v) { c.eval.metric_cutoff = as_index(v); },
       [](const RunConfig& c) { return fmt_index(c.eval.metric_cutoff); }},
      {"eval", "n_search_samples", true, [](RunConfig& c, const Value& v) { c.eval.n_search_samples = as_index(v); },
       [](const RunConfig& c) { return fmt_index(c.eval.n_search_samples); }},
      {"eval", "n_repeats", true, [](RunConfig& c, const Value& v) { c.eval.n_repeats = as_index(v); },
       [](const RunConfig& c) { return fmt_index(c.eval.n_repeats); }},
      {"eval", "split", true,
       [](RunConfig& c, const Value& v) {
         const auto r = as_list<double>(v, as_double);
         if (r.size() != 3) fail("split needs three ratios [train, valid, test]");
         c.eval.ratios = {r[0], r[1], r[2]};
       },
       [](const RunConfig& c) {
         return fmt_list(std::vector<double>{c.eval.ratios.train, c.eval.ratios.valid, c.eval.ratios.test},
                         fmt_double);
       }},
      {"eval", "seed", true, [](RunConfig& c, const Value& v) { c.eval.seed = as_u64(v); },
       [](const RunConfig& c) { return std::to_string(c.eval.seed); }},
      {"eval", "jobs", false, [](RunConfig& c, const Value& v) { c.eval.jobs = as_index(v); },
       [](const RunConfig& c) { return fmt_index(c.eval.jobs); }},

      {"select", "method", true, [](RunConfig& c, const Value& v) { c.select.method = as_method(v); },
       [](const RunConfig& c) { return quote(method_name(c.select.method)); }},
      {"select", "fraction", true, [](RunConfig& c, const Value& v) { c.select.fraction = as_double(v); },
       [](const RunConfig& c) { return fmt_double(c.select.fraction); }},
      {"select", "alpha", true, [](RunConfig& c, const Value& v) { c.select.mix.alpha = as_double(v); },
       [](const RunConfig& c) { return fmt_double(c.select.mix.alpha); }},
      {"select", "p", true, [](RunConfig& c, const Value& v) { c.select.mix.p = as_double(v); },
       [](const RunConfig& c) { return fmt_double(c.select.mix.p); }},
      {"select", "k", true, [](RunConfig& c, const Value& v) { c.select.mix.k = as_index(v); },
       [](const RunConfig& c) { return fmt_index(c.select.mix.k); }},
      {"select", "lambda1", true, [](RunConfig& c, const Value& v) { c.select.cfecbf.lambda1 = as_double(v); },
       [](const RunConfig& c) { return fmt_double(c.select.cfecbf.lambda1); }},
      {"select", "lambda2", true, [](RunConfig& c, const Value& v) { c.select.cfecbf.lambda2 = as_double(v); },
       [](const RunConfig& c) { return fmt_double(c.select.cfecbf.lambda2); }},

      {"stability", "fraction", true, [](RunConfig& c, const Value& v) { c.stability_fraction = as_double(v); },
       [](const RunConfig& c) { return fmt_double(c.stability_fraction); }},

      {"output", "dir", false, [](RunConfig& c, const Value& v) { c.output_dir = as_string(v); },
       [](const RunConfig& c) { return quote(c.output_dir); }},
      {"output", "log_level", false,
       [](RunConfig& c, const Value& v) {
         const std::string s = as_string(v);
         static const char* levels[] = {"trace", "debug", "info", "warn", "error", "off"};
         if (std::find(std::begin(levels), std::end(levels), s) == std::end(levels))
           fail("unknown log level '" + s + "'");
         c.log_level = s;
       },
       [](const RunConfig& c) { return quote(c.log_level); }},
  };
  return table;
}

const KeySpec& find_key(std::string_view section, std::string_view key) {
  for (const auto& spec : key_table())
    if (spec.section == section && spec.key == key) return spec;
  if (std::none_of(key_table().begin(), key_table().end(), [&](const KeySpec& s) { return s.section == section; }))
    fail("unknown section [" + std::string(section) + "]");
  fail("unknown key '" + std::string(key) + "' in section [" + std::string(section) + "]");
}

void assign(RunConfig& config, const KeySpec& spec, const Value& value) {
  try {
    spec.set(config, value);
  } catch (const Error& e) {
    fail(std::string(spec.section) + "." + std::string(spec.key) + ": " + e.what());
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

int bracket_balance(std::string_view s) {
  int depth = 0;
  char quote_char = 0;
  for (char c : s) {
    if (quote_char) {
      if (c == quote_char) quote_char = 0;
    } else if (c == '"' || c == '\'') {
      quote_char = c;
    } else if (c == '#') {
      break;
    } else if (c == '[') {
      ++depth;
    } else if (c == ']') {
      --depth;
    }
  }
  return depth;
}

}  // namespace

std::filesystem::path RunConfig::resolved_data_path() const {
  const std::filesystem::path p(data_path);
  return p.is_absolute() ? p : base_dir / p;
}

std::filesystem::path RunConfig::resolved_output_dir() const {
  const std::filesystem::path p(output_dir);
  return p.is_absolute() ? p : base_dir / p;
}

void RunConfig::validate() const {
  if (data_path.empty()) fail("data.path must not be empty");
  if (methods.empty()) fail("eval.methods must list at least one method");
  try {
    ingest.validate();
    eval.validate();
    select.mix.validate();
    select.cfecbf.validate();
  } catch (const Error& e) {
    if (error_class(e.code()) == ErrorClass::kConfig) throw;
    fail(e.what());
  }
  if (!(select.fraction > 0.0 && select.fraction <= 1.0)) fail("select.fraction must lie in (0, 1]");
  if (!(stability_fraction > 0.0 && stability_fraction <= 1.0)) fail("stability.fraction must lie in (0, 1]");
  if (!(eval.ratios.train > 0.0 && eval.ratios.valid > 0.0 && eval.ratios.test > 0.0) ||
      std::abs(eval.ratios.train + eval.ratios.valid + eval.ratios.test - 1.0) > 1e-9)
    fail("eval.split ratios must be positive and sum to 1");
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir, std::string_view origin) {
  RunConfig config;
  config.base_dir = base_dir;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  auto where = [&](int at) { return std::string(origin) + ":" + std::to_string(at) + ": "; };
  while (std::getline(in, line)) {
    const int start_line = ++line_no;
    std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    if (body.front() == '[') {
      const auto close = body.find(']');
      if (close == std::string_view::npos) fail(where(start_line) + "unterminated section header");
      const std::string_view rest = trim(body.substr(close + 1));
      if (!rest.empty() && rest.front() != '#') fail(where(start_line) + "unexpected text after section header");
      section = std::string(trim(body.substr(1, close - 1)));
      if (std::none_of(key_table().begin(), key_table().end(),
                       [&](const KeySpec& s) { return s.section == section; }))
        fail(where(start_line) + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) fail(where(start_line) + "expected key = value");
    if (section.empty()) fail(where(start_line) + "key outside of any section");
    const std::string key(trim(body.substr(0, eq)));
    std::string value(trim(body.substr(eq + 1)));
    while (bracket_balance(value) > 0 && std::getline(in, line)) {
      ++line_no;
      value += "\n" + line;
    }
    try {
      assign(config, find_key(section, key), parse_value_text(value));
    } catch (const Error& e) {
      fail(where(start_line) + e.what());
    }
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path(),
                      path.string());
}

void set_config_value(RunConfig& config, std::string_view dotted_key, std::string_view value) {
  const auto dot = dotted_key.find('.');
  if (dot == std::string_view::npos) fail("expected section.key, got '" + std::string(dotted_key) + "'");
  const KeySpec& spec = find_key(dotted_key.substr(0, dot), dotted_key.substr(dot + 1));
  assign(config, spec, parse_value_text(value));
}

void apply_env_overrides(RunConfig& config, const EnvLookup& lookup) {
  for (const auto& spec : key_table()) {
    std::string name = "MAXFEAT_";
    for (char c : spec.section) name.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    name += "__";
    for (char c : spec.key) name.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    const char* raw = lookup(name.c_str());
    if (raw == nullptr) continue;
    try {
      assign(config, spec, parse_value_text(raw));
    } catch (const Error& e) {
      fail(name + ": " + e.what());
    }
  }
}

void apply_env_overrides(RunConfig& config) {
  apply_env_overrides(config, [](const char* name) { return static_cast<const char*>(std::getenv(name)); });
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& spec : key_table()) out.push_back(std::string(spec.section) + "." + std::string(spec.key));
  return out;
}

namespace {

std::string dump(const RunConfig& config, bool hashed_only) {
  std::string out;
  std::string_view section;
  for (const auto& spec : key_table()) {
    if (hashed_only && !spec.hashed) continue;
    if (spec.section != section) {
      if (!section.empty()) out += "\n";
      section = spec.section;
      out += "[" + std::string(section) + "]\n";
    }
    out += std::string(spec.key) + " = " + spec.dump(config) + "\n";
  }
  return out;
}

}  // namespace

std::string dump_config(const RunConfig& config) { return dump(config, false); }

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump(config, true)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace maxfeat
