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

#include <sstream>

#include "maxfeat/dataset.hpp"
#include "maxfeat/errors.hpp"
#include "test_util.hpp"

using namespace maxfeat;
using testutil::code_of;
using testutil::TempDir;

namespace {

DenseMatrix dense(const SparseMatrix& m) { return DenseMatrix(m); }

IngestConfig with_min_items(Index n) {
  IngestConfig cfg;
  cfg.min_feature_items = n;
  return cfg;
}

}  // namespace

TEST_SUITE("interactions") {
  TEST_CASE("whitespace separated rows") {
    TempDir dir;
    const auto path = dir.write("r.tsv", "u1 i1\nu1 i2\nu2 i2\n");
    const auto t = load_interactions(path);
    DenseMatrix expected(2, 2);
    expected << 1, 1, 0, 1;
    CHECK(dense(t.matrix) == expected);
    CHECK(t.users.names() == std::vector<std::string>{"u1", "u2"});
    CHECK(t.items.names() == std::vector<std::string>{"i1", "i2"});
  }

  TEST_CASE("duplicates are summed") {
    TempDir dir;
    const auto t = load_interactions(dir.write("r.tsv", "u1\ti1\nu1\ti1\n"));
    CHECK(t.matrix.coeff(0, 0) == 2.0);
    CHECK(t.matrix.nonZeros() == 1);
  }

  TEST_CASE("csv with header and explicit values") {
    TempDir dir;
    const auto t = load_interactions(dir.write("r.csv", "user,item,rating\nu1,i1,4\n\"u2\",i1,2.5\n"));
    CHECK(t.matrix.rows() == 2);
    CHECK(t.matrix.coeff(1, 0) == 2.5);
  }

  TEST_CASE("first-appearance order") {
    TempDir dir;
    const auto t = load_interactions(dir.write("r.tsv", "b\tz\na\ty\nb\tx\n"));
    CHECK(t.users.names() == std::vector<std::string>{"b", "a"});
    CHECK(t.items.names() == std::vector<std::string>{"z", "y", "x"});
  }

  TEST_CASE("nonpositive values are dropped") {
    TempDir dir;
    const auto t = load_interactions(dir.write("r.tsv", "u1\ti1\t0\nu1\ti2\t1\n"));
    CHECK(t.matrix.nonZeros() == 1);
  }

  TEST_CASE("parse errors carry the line number") {
    TempDir dir;
    const auto path = dir.write("r.tsv", "u1\ti1\nu2\ti2\tabc\n");
    CHECK(code_of([&] { load_interactions(path); }) == ErrorCode::kParseError);
    CHECK(testutil::message_of([&] { load_interactions(path); }).find("r.tsv:2:") != std::string::npos);
  }

  TEST_CASE("empty file") {
    TempDir dir;
    CHECK(code_of([&] { load_interactions(dir.write("r.tsv", "user\titem\n")); }) == ErrorCode::kEmptyDataset);
  }

  TEST_CASE("dataset of the size of a public movie corpus") {
    TempDir dir;
    std::ostringstream out;
    const Index users = 6040, items = 3706;
    for (Index u = 0; u < users; ++u) out << "u" << u << "\ti" << (u % items) << "\n";
    for (Index i = 0; i < items; ++i) out << "u" << (i * 7 % users) << "\ti" << i << "\n";
    const auto t = load_interactions(dir.write("r.tsv", out.str()));
    CHECK(t.matrix.rows() == 6040);
    CHECK(t.matrix.cols() == 3706);
  }
}

TEST_SUITE("categorical features") {
  TEST_CASE("document frequency filter") {
    TempDir dir;
    IdTable items;
    items.intern("i1");
    items.intern("i2");
    const auto path = dir.write("f.tsv", "i1\tgenre:drama\ni2\tgenre:drama\ni1\twriter:x\n");
    const auto f = load_categorical_features(path, with_min_items(2), items);
    CHECK(f.names == std::vector<std::string>{"genre:drama"});
    CHECK(f.matrix.rows() == 2);
    CHECK(f.matrix.cols() == 1);
    CHECK(f.matrix.nonZeros() == 2);
  }

  TEST_CASE("entries are binary and categories kept") {
    TempDir dir;
    IdTable items;
    const auto path = dir.write("f.tsv", "item\tfeature\tcategory\ni1\ta\tactor\ni1\ta\tactor\ni2\ta\tactor\n");
    const auto f = load_categorical_features(path, with_min_items(1), items);
    CHECK(f.matrix.coeff(0, 0) == 1.0);
    CHECK(f.categories == std::vector<std::string>{"actor"});
  }

  TEST_CASE("empty feature space") {
    TempDir dir;
    IdTable items;
    CHECK(code_of([&] { load_categorical_features(dir.write("f.tsv", ""), {}, items); }) ==
          ErrorCode::kEmptyFeatureSpace);
    const auto only_rare = dir.write("g.tsv", "i1\ta\ni2\tb\n");
    CHECK(code_of([&] { load_categorical_features(only_rare, with_min_items(2), items); }) ==
          ErrorCode::kEmptyFeatureSpace);
  }

  TEST_CASE("unknown items when new items are not allowed") {
    TempDir dir;
    IdTable items;
    items.intern("i1");
    IngestConfig cfg = with_min_items(1);
    cfg.allow_new_items = false;
    CHECK(code_of([&] { load_categorical_features(dir.write("f.tsv", "i1\ta\ni9\ta\n"), cfg, items); }) ==
          ErrorCode::kUnknownItem);
  }

  TEST_CASE("every kept column meets the frequency floor") {
    TempDir dir;
    std::ostringstream out;
    for (int i = 0; i < 50; ++i)
      for (int j = 0; j < 40; ++j)
        if ((i * 31 + j * 17) % 7 == 0 || (j % 5 == 0 && i < j / 5)) out << "i" << i << "\tf" << j << "\n";
    IdTable items;
    const auto f = load_categorical_features(dir.write("f.tsv", out.str()), with_min_items(3), items);
    const Eigen::SparseMatrix<double> cols = f.matrix;
    for (Index j = 0; j < cols.outerSize(); ++j) CHECK(cols.col(j).nonZeros() >= 3);
  }

  TEST_CASE("feature count of a public movie corpus") {
    // 3,665 features carried by at least two items plus 500 singletons.
    TempDir dir;
    std::ostringstream out;
    for (int j = 0; j < 3665; ++j) out << "i" << (j % 900) << "\tactor:" << j << "\ni" << ((j + 1) % 900) << "\tactor:" << j << "\n";
    for (int j = 0; j < 500; ++j) out << "i" << j << "\twriter:" << j << "\n";
    IdTable items;
    const auto f = load_categorical_features(dir.write("f.tsv", out.str()), {}, items);
    CHECK(f.matrix.cols() == 3665);
  }
}

TEST_SUITE("textual features") {
  TEST_CASE("token counts") {
    TempDir dir;
    IdTable items;
    IngestConfig cfg;
    cfg.min_token_count = 1;
    const auto f = load_textual_features(dir.write("t.tsv", "i1\tgood good game\n"), cfg, items);
    CHECK(f.names == std::vector<std::string>{"good", "game"});
    CHECK(f.matrix.coeff(0, 0) == 2.0);
    CHECK(f.matrix.coeff(0, 1) == 1.0);
  }

  TEST_CASE("rare tokens are discarded") {
    TempDir dir;
    std::ostringstream out;
    for (int i = 0; i < 9; ++i) out << "i" << i << "\trare common common\n";
    out << "i9\tcommon\n";
    IdTable items;
    const auto f = load_textual_features(dir.write("t.tsv", out.str()), {}, items);
    CHECK(f.names == std::vector<std::string>{"common"});
  }

  TEST_CASE("rows of one item are concatenated") {
    TempDir dir;
    IdTable items;
    IngestConfig cfg;
    cfg.min_token_count = 1;
    const auto f = load_textual_features(dir.write("t.tsv", "i1\talpha beta\ni1\talpha\n"), cfg, items);
    CHECK(f.matrix.rows() == 1);
    CHECK(f.matrix.coeff(0, 0) == 2.0);
  }

  TEST_CASE("disjoint vocabularies give disjoint supports") {
    TempDir dir;
    IdTable items;
    IngestConfig cfg;
    cfg.min_token_count = 1;
    const auto f = load_textual_features(dir.write("t.tsv", "i1\tred blue\ni2\tgreen yellow\n"), cfg, items);
    const DenseMatrix d = dense(f.matrix);
    CHECK((d.row(0).array() * d.row(1).array()).abs().sum() == 0.0);
  }

  TEST_CASE("tokenizer") {
    CHECK(tokenize("Hello, World! a b2 x-ray") == std::vector<std::string>{"hello", "world", "b2", "ray"});
    CHECK(tokenize("") .empty());
  }
}

TEST_SUITE("dataset directory") {
  const char* kInteractions = "user\titem\nu1\ti1\nu1\ti2\nu2\ti2\nu3\ti3\n";
  const char* kFeatures = "item\tfeature\ni1\tg:a\ni2\tg:a\ni2\tg:b\ni3\tg:b\ni4\tg:a\n";

  TEST_CASE("cold items from the feature file are appended") {
    TempDir dir;
    dir.write("interactions.tsv", kInteractions);
    dir.write("features.tsv", kFeatures);
    const auto d = load_dataset(dir.path(), {});
    CHECK(d.n_items() == 4);
    CHECK(d.item_ids.back() == "i4");
    CHECK(d.interactions.cols() == d.features.rows());
    CHECK(d.n_features() == 2);
  }

  TEST_CASE("users without interactions are dropped") {
    TempDir dir;
    dir.write("users.tsv", "user\nu0\nu1\nu2\nu3\n");
    dir.write("interactions.tsv", kInteractions);
    dir.write("features.tsv", kFeatures);
    const auto d = load_dataset(dir.path(), {});
    CHECK(d.user_ids == std::vector<std::string>{"u1", "u2", "u3"});
  }

  TEST_CASE("categories table") {
    TempDir dir;
    dir.write("interactions.tsv", kInteractions);
    dir.write("features.tsv", kFeatures);
    dir.write("categories.tsv", "feature\tcategory\ng:a\tgenre\n");
    const auto d = load_dataset(dir.path(), {});
    CHECK(d.feature_categories == std::vector<std::string>{"genre", ""});
  }

  TEST_CASE("binarized interaction view") {
    TempDir dir;
    dir.write("interactions.tsv", "u1\ti1\t5\nu1\ti2\t1\n");
    dir.write("features.tsv", "i1\ta\ni2\ta\n");
    auto d = load_dataset(dir.path(), {});
    CHECK(d.interaction_view().coeff(0, 0) == 1.0);
    CHECK(d.interactions.coeff(0, 0) == 5.0);
    IngestConfig raw;
    raw.binarize = false;
    CHECK(load_dataset(dir.path(), raw).interaction_view().coeff(0, 0) == 5.0);
  }

  TEST_CASE("missing directory names the path") {
    const std::string msg = testutil::message_of([] { load_dataset("/nonexistent/maxfeat", {}); });
    CHECK(msg.find("/nonexistent/maxfeat") != std::string::npos);
    CHECK(code_of([] { load_dataset("/nonexistent/maxfeat", {}); }) == ErrorCode::kIoError);
  }

  TEST_CASE("ingest is deterministic") {
    TempDir dir;
    dir.write("interactions.tsv", kInteractions);
    dir.write("features.tsv", kFeatures);
    const auto a = load_dataset(dir.path(), {});
    const auto b = load_dataset(dir.path(), {});
    CHECK(dense(a.interactions) == dense(b.interactions));
    CHECK(dense(a.features) == dense(b.features));
    CHECK(a.item_ids == b.item_ids);
    CHECK(a.feature_names == b.feature_names);
  }

  TEST_CASE("write and reload round trip") {
    TempDir dir;
    dir.write("in/interactions.tsv", "u1\ti1\t2.5\nu1\ti2\nu2\ti2\t0.125\nu3\ti3\n");
    dir.write("in/features.tsv", "i1\tg:a\ni2\tg:a\ni2\tg:b\ni3\tg:b\ni4\tg:c\n");
    dir.write("in/categories.tsv", "g:a\tgenre\ng:b\tgenre\ng:c\tother\n");
    IngestConfig cfg = with_min_items(1);
    const auto original = load_dataset(dir / "in", cfg);
    write_dataset(original, dir / "out");
    cfg.mode = FeatureMode::kWeighted;
    const auto again = load_dataset(dir / "out", cfg);
    CHECK(dense(again.interactions) == dense(original.interactions));
    CHECK(dense(again.features) == dense(original.features));
    CHECK(again.user_ids == original.user_ids);
    CHECK(again.item_ids == original.item_ids);
    CHECK(again.feature_names == original.feature_names);
    CHECK(again.feature_categories == original.feature_categories);
  }

  TEST_CASE("config validation") {
    CHECK(code_of([] { with_min_items(0).validate(); }) == ErrorCode::kConfigError);
  }
}
