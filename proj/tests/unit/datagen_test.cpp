// Copyright 2026 The Cirrus Authors.
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

#include <gtest/gtest.h>

#include <filesystem>
#include <map>

#include "cirrus/datagen/tables.hpp"
#include "cirrus/format/base_table.hpp"
#include "cirrus/format/range_reader.hpp"

namespace cirrus::datagen {
namespace {

TEST(Datagen, RowsArePureFunctionsOfIndex) {
  DatagenOptions o;
  o.scale = 5000;
  auto whole = generate_rows("lineitem", o, 0, 5000);
  auto piece = generate_rows("lineitem", o, 1234, 1300);
  ASSERT_EQ(piece.num_rows(), 66u);
  for (std::size_t r = 0; r < piece.num_rows(); ++r) EXPECT_EQ(piece.row(r), whole.row(1234 + r));
  auto other_seed = o;
  other_seed.seed = 2;
  EXPECT_NE(generate_rows("lineitem", other_seed, 0, 10).row(0), whole.row(0));
}

TEST(Datagen, TableSizesScale) {
  EXPECT_EQ(table_rows("lineitem", 1000000), 1000000u);
  EXPECT_EQ(table_rows("orders", 1000000), 250000u);
  EXPECT_EQ(table_rows("customer", 1000000), 25000u);
  EXPECT_EQ(table_rows("nation", 1000000), 25u);
  for (const auto& t : table_names()) EXPECT_EQ(table_rows(t, 0), 0u) << t;
}

TEST(Datagen, ZeroScaleStillHasOneObjectPerTable) {
  DatagenOptions o;
  o.scale = 0;
  auto data = generate(o);
  for (const auto& t : table_names()) {
    const auto& info = data.catalog.table(t);
    EXPECT_EQ(info.rows, 0u);
    EXPECT_EQ(info.objects.size(), 1u);
  }
}

TEST(Datagen, ObjectsRespectTheSizeCap) {
  DatagenOptions o;
  o.scale = 60000;
  o.object_size = 256 << 10;
  auto data = generate(o);
  std::map<std::string, std::uint64_t> bytes;
  for (const auto& [key, payload] : data.objects) {
    EXPECT_LE(payload->size(), o.object_size) << key.str();
    bytes[key.key.substr(7, key.key.find('/', 7) - 7)] += payload->size();
  }
  for (const auto& [table, info] : data.catalog.tables) {
    const auto cap = o.object_size;
    EXPECT_GE(info.objects.size(), (bytes[table] + cap - 1) / cap) << table;
  }
  // Reading every object back yields the generated table.
  std::uint64_t rows = 0;
  for (const auto& [key, payload] : data.objects) {
    if (key.key.rfind("tables/orders/", 0) != 0) continue;
    format::BufferReader reader(payload);
    for (const auto& b : format::scan_base_table(reader, {})) rows += b.num_rows();
  }
  EXPECT_EQ(rows, table_rows("orders", o.scale));
}

TEST(Datagen, DirectoryRoundTrip) {
  DatagenOptions o;
  o.scale = 3000;
  o.object_size = 64 << 10;
  auto data = generate(o);
  auto dir = std::filesystem::temp_directory_path() / "cirrus-datagen-test";
  std::filesystem::remove_all(dir);
  write_directory(data, dir);
  auto back = read_directory(dir);
  EXPECT_EQ(catalog_to_json(back.catalog), catalog_to_json(data.catalog));
  std::map<store::ObjectKey, store::Payload> want(data.objects.begin(), data.objects.end());
  ASSERT_EQ(back.objects.size(), want.size());
  for (const auto& [key, payload] : back.objects) {
    ASSERT_TRUE(want.count(key)) << key.str();
    EXPECT_EQ(*payload, *want[key]);
  }
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace cirrus::datagen
