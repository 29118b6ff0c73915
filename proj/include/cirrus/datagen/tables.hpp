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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cirrus/format/base_table.hpp"
#include "cirrus/format/row_batch.hpp"
#include "cirrus/store/object_store.hpp"

namespace cirrus::datagen {

using format::RowBatch;
using format::Schema;

struct DatagenOptions {
  /// lineitem rows; the other tables scale from it.
  std::uint64_t scale = 1'000'000;
  std::uint64_t object_size = 8ull << 20;
  std::uint64_t seed = 1;
  std::size_t row_group_rows = 16384;
};

/// lineitem (fact), orders, customer and nation.
const std::vector<std::string>& table_names();
Schema table_schema(const std::string& table);
std::uint64_t table_rows(const std::string& table, std::uint64_t scale);

/// Rows [lo, hi) of `table`. Every row is a pure function of (seed, table,
/// row index), so any split of the table yields the same rows.
RowBatch generate_rows(const std::string& table, const DatagenOptions& options, std::uint64_t lo, std::uint64_t hi);
RowBatch generate_table(const std::string& table, const DatagenOptions& options);

struct TableInfo {
  std::string name;
  Schema schema;
  std::uint64_t rows = 0;
  std::vector<store::ObjectKey> objects;
};

struct Catalog {
  DatagenOptions options;
  std::map<std::string, TableInfo> tables;

  /// Throws std::out_of_range naming the table.
  const TableInfo& table(const std::string& name) const;
};

struct GeneratedData {
  Catalog catalog;
  std::vector<std::pair<store::ObjectKey, store::Payload>> objects;

  void preload(store::ObjectStore& store) const;
};

store::ObjectKey table_object_key(const std::string& table, std::size_t part);

/// Splits each table into base-table objects no larger than object_size.
/// An empty table still gets one (empty) object.
GeneratedData generate(const DatagenOptions& options);

/// Writes objects under `dir`/objects/ plus `dir`/catalog.json.
void write_directory(const GeneratedData& data, const std::filesystem::path& dir);
GeneratedData read_directory(const std::filesystem::path& dir);

std::string catalog_to_json(const Catalog& catalog);
Catalog catalog_from_json(const std::string& text);

}  // namespace cirrus::datagen
