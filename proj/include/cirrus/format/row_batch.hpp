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
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cirrus/format/schema.hpp"

namespace cirrus::format {

/// A single cell. Dates surface as int64 day numbers; null is monostate.
using Value = std::variant<std::monostate, std::int64_t, double, std::string>;

bool is_null(const Value& v);
std::string render(const Value& v);
/// Total order: null < numbers (compared numerically) < strings.
int compare_values(const Value& a, const Value& b);

using Dictionary = std::vector<std::string>;

/// Dictionary-encoded strings sharing one immutable dictionary.
struct DictStrings {
  std::vector<std::uint32_t> codes;
  std::shared_ptr<const Dictionary> dictionary;
};

using ColumnData = std::variant<std::vector<std::int64_t>, std::vector<double>, std::vector<std::int32_t>,
                                std::vector<std::string>, DictStrings>;

/// One column vector. `validity` is empty when every row is valid, otherwise
/// one byte per row (1 = valid).
class Column {
 public:
  Column() = default;
  Column(DataType type, ColumnData data, std::vector<std::uint8_t> validity = {});

  static Column empty(DataType type);

  DataType type() const { return type_; }
  const ColumnData& data() const { return data_; }
  const std::vector<std::uint8_t>& validity() const { return validity_; }
  std::size_t size() const;

  bool valid(std::size_t row) const { return validity_.empty() || validity_[row] != 0; }
  bool has_nulls() const;
  bool is_dictionary() const { return std::holds_alternative<DictStrings>(data_); }

  std::int64_t int_at(std::size_t row) const;  // int64 and date32
  double float_at(std::size_t row) const;      // any numeric
  std::string_view string_at(std::size_t row) const;
  Value value(std::size_t row) const;

  const std::vector<std::int64_t>& int64s() const { return std::get<std::vector<std::int64_t>>(data_); }
  const std::vector<double>& float64s() const { return std::get<std::vector<double>>(data_); }
  const std::vector<std::int32_t>& date32s() const { return std::get<std::vector<std::int32_t>>(data_); }

  Column take(std::span<const std::uint32_t> rows) const;
  /// Same column with dictionary codes replaced by their strings.
  Column materialized() const;

 private:
  DataType type_ = DataType::kInt64;
  ColumnData data_;
  std::vector<std::uint8_t> validity_;
};

/// Equal-length columns under one schema. Treated as immutable once built.
class RowBatch {
 public:
  RowBatch() = default;
  RowBatch(Schema schema, std::vector<Column> columns);

  static RowBatch empty(const Schema& schema);

  const Schema& schema() const { return schema_; }
  const std::vector<Column>& columns() const { return columns_; }
  const Column& column(std::size_t i) const { return columns_.at(i); }
  const Column& column(std::string_view name) const { return columns_.at(schema_.index_of(name)); }
  std::size_t num_rows() const { return rows_; }
  std::size_t num_columns() const { return columns_.size(); }

  RowBatch take(std::span<const std::uint32_t> rows) const;
  std::vector<Value> row(std::size_t r) const;

  /// Rough in-memory footprint, used for memory reservations.
  std::uint64_t estimated_bytes() const;

 private:
  Schema schema_;
  std::vector<Column> columns_;
  std::size_t rows_ = 0;
};

/// Concatenates batches sharing one schema. Dictionary columns stay encoded
/// only when every input shares the same dictionary.
RowBatch concat(std::span<const RowBatch> batches, const Schema& schema);

/// Builds a batch row by row from Values; for tests and small results.
class RowBatchBuilder {
 public:
  explicit RowBatchBuilder(Schema schema);
  RowBatchBuilder& add_row(const std::vector<Value>& row);
  RowBatch build();

 private:
  Schema schema_;
  std::vector<ColumnData> data_;
  std::vector<std::vector<std::uint8_t>> validity_;
  std::vector<bool> saw_null_;
  std::size_t rows_ = 0;
};

/// Row-level equality, ignoring physical encoding.
bool same_rows(const RowBatch& a, const RowBatch& b);

}  // namespace cirrus::format
