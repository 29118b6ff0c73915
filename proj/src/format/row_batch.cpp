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

#include "cirrus/format/row_batch.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "cirrus/errors.hpp"

namespace cirrus::format {
namespace {

bool matches(DataType type, const ColumnData& data) {
  switch (type) {
    case DataType::kInt64:
      return std::holds_alternative<std::vector<std::int64_t>>(data);
    case DataType::kFloat64:
      return std::holds_alternative<std::vector<double>>(data);
    case DataType::kDate32:
      return std::holds_alternative<std::vector<std::int32_t>>(data);
    case DataType::kString:
      return std::holds_alternative<std::vector<std::string>>(data) || std::holds_alternative<DictStrings>(data);
  }
  return false;
}

ColumnData empty_data(DataType type) {
  switch (type) {
    case DataType::kInt64:
      return std::vector<std::int64_t>{};
    case DataType::kFloat64:
      return std::vector<double>{};
    case DataType::kDate32:
      return std::vector<std::int32_t>{};
    case DataType::kString:
      return std::vector<std::string>{};
  }
  return std::vector<std::int64_t>{};
}

int rank(const Value& v) {
  if (std::holds_alternative<std::monostate>(v)) return 0;
  if (std::holds_alternative<std::string>(v)) return 2;
  return 1;
}

}  // namespace

bool is_null(const Value& v) { return std::holds_alternative<std::monostate>(v); }

std::string render(const Value& v) {
  if (auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (auto* d = std::get_if<double>(&v)) {
    std::ostringstream out;
    out.precision(17);
    out << *d;
    return out.str();
  }
  if (auto* s = std::get_if<std::string>(&v)) return *s;
  return "NULL";
}

int compare_values(const Value& a, const Value& b) {
  int ra = rank(a), rb = rank(b);
  if (ra != rb) return ra < rb ? -1 : 1;
  if (ra == 0) return 0;
  if (ra == 2) {
    int c = std::get<std::string>(a).compare(std::get<std::string>(b));
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
    auto x = std::get<std::int64_t>(a), y = std::get<std::int64_t>(b);
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  double x = std::holds_alternative<double>(a) ? std::get<double>(a) : static_cast<double>(std::get<std::int64_t>(a));
  double y = std::holds_alternative<double>(b) ? std::get<double>(b) : static_cast<double>(std::get<std::int64_t>(b));
  return x < y ? -1 : (x > y ? 1 : 0);
}

Column::Column(DataType type, ColumnData data, std::vector<std::uint8_t> validity)
    : type_(type), data_(std::move(data)), validity_(std::move(validity)) {
  if (!matches(type_, data_)) throw SchemaMismatch("column data does not match type " + std::string(to_string(type)));
  if (!validity_.empty() && validity_.size() != size()) throw SchemaMismatch("validity length mismatch");
  if (auto* d = std::get_if<DictStrings>(&data_)) {
    if (!d->dictionary) throw SchemaMismatch("dictionary column without dictionary");
    for (auto code : d->codes) {
      if (code >= d->dictionary->size()) throw CorruptObject("dictionary code out of range");
    }
  }
}

Column Column::empty(DataType type) { return Column(type, empty_data(type)); }

std::size_t Column::size() const {
  return std::visit(
      [](const auto& d) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(d)>, DictStrings>) {
          return d.codes.size();
        } else {
          return d.size();
        }
      },
      data_);
}

bool Column::has_nulls() const {
  return std::any_of(validity_.begin(), validity_.end(), [](std::uint8_t v) { return v == 0; });
}

std::int64_t Column::int_at(std::size_t row) const {
  if (auto* v = std::get_if<std::vector<std::int64_t>>(&data_)) return (*v)[row];
  if (auto* v = std::get_if<std::vector<std::int32_t>>(&data_)) return (*v)[row];
  throw SchemaMismatch("column is not integral");
}

double Column::float_at(std::size_t row) const {
  if (auto* v = std::get_if<std::vector<double>>(&data_)) return (*v)[row];
  return static_cast<double>(int_at(row));
}

std::string_view Column::string_at(std::size_t row) const {
  if (auto* v = std::get_if<std::vector<std::string>>(&data_)) return (*v)[row];
  if (auto* d = std::get_if<DictStrings>(&data_)) return (*d->dictionary)[d->codes[row]];
  throw SchemaMismatch("column is not a string column");
}

Value Column::value(std::size_t row) const {
  if (!valid(row)) return std::monostate{};
  switch (type_) {
    case DataType::kInt64:
    case DataType::kDate32:
      return int_at(row);
    case DataType::kFloat64:
      return float64s()[row];
    case DataType::kString:
      return std::string(string_at(row));
  }
  return std::monostate{};
}

Column Column::take(std::span<const std::uint32_t> rows) const {
  std::vector<std::uint8_t> validity;
  if (!validity_.empty()) {
    validity.reserve(rows.size());
    for (auto r : rows) validity.push_back(validity_[r]);
  }
  ColumnData out = std::visit(
      [&](const auto& d) -> ColumnData {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, DictStrings>) {
          DictStrings picked{{}, d.dictionary};
          picked.codes.reserve(rows.size());
          for (auto r : rows) picked.codes.push_back(d.codes[r]);
          return picked;
        } else {
          T picked;
          picked.reserve(rows.size());
          for (auto r : rows) picked.push_back(d[r]);
          return picked;
        }
      },
      data_);
  return Column(type_, std::move(out), std::move(validity));
}

Column Column::materialized() const {
  auto* d = std::get_if<DictStrings>(&data_);
  if (d == nullptr) return *this;
  std::vector<std::string> strings;
  strings.reserve(d->codes.size());
  for (auto code : d->codes) strings.push_back((*d->dictionary)[code]);
  return Column(type_, std::move(strings), validity_);
}

RowBatch::RowBatch(Schema schema, std::vector<Column> columns) : schema_(std::move(schema)), columns_(std::move(columns)) {
  if (columns_.size() != schema_.size()) throw SchemaMismatch("column count does not match schema " + schema_.describe());
  rows_ = columns_.empty() ? 0 : columns_.front().size();
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].type() != schema_.field(i).type)
      throw SchemaMismatch("column '" + schema_.field(i).name + "' has the wrong type");
    if (columns_[i].size() != rows_) throw SchemaMismatch("columns of a batch must have equal length");
    if (!schema_.field(i).nullable && columns_[i].has_nulls())
      throw SchemaMismatch("null in non-nullable column '" + schema_.field(i).name + "'");
  }
}

RowBatch RowBatch::empty(const Schema& schema) {
  std::vector<Column> cols;
  for (const auto& f : schema.fields()) cols.push_back(Column::empty(f.type));
  return RowBatch(schema, std::move(cols));
}

RowBatch RowBatch::take(std::span<const std::uint32_t> rows) const {
  std::vector<Column> cols;
  cols.reserve(columns_.size());
  for (const auto& c : columns_) cols.push_back(c.take(rows));
  return RowBatch(schema_, std::move(cols));
}

std::vector<Value> RowBatch::row(std::size_t r) const {
  std::vector<Value> out;
  out.reserve(columns_.size());
  for (const auto& c : columns_) out.push_back(c.value(r));
  return out;
}

std::uint64_t RowBatch::estimated_bytes() const {
  std::uint64_t total = 0;
  for (const auto& c : columns_) {
    total += c.validity().size();
    std::visit(
        [&](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, DictStrings>) {
            total += d.codes.size() * sizeof(std::uint32_t);
          } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
            for (const auto& s : d) total += sizeof(std::string) + (s.size() > 15 ? s.size() : 0);
          } else {
            total += d.size() * sizeof(typename T::value_type);
          }
        },
        c.data());
  }
  return total;
}

RowBatch concat(std::span<const RowBatch> batches, const Schema& schema) {
  for (const auto& b : batches) {
    if (!(b.schema() == schema)) throw SchemaMismatch("cannot concatenate batches with different schemas");
  }
  if (batches.size() == 1) return batches.front();
  std::vector<Column> cols;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    bool any_nulls = false;
    std::size_t total = 0;
    for (const auto& b : batches) {
      any_nulls = any_nulls || !b.column(c).validity().empty();
      total += b.num_rows();
    }
    std::vector<std::uint8_t> validity;
    if (any_nulls) {
      validity.reserve(total);
      for (const auto& b : batches) {
        const auto& v = b.column(c).validity();
        if (v.empty()) {
          validity.insert(validity.end(), b.num_rows(), 1);
        } else {
          validity.insert(validity.end(), v.begin(), v.end());
        }
      }
    }
    // Shared dictionary: keep codes.
    std::shared_ptr<const Dictionary> shared;
    bool all_same_dict = !batches.empty();
    for (const auto& b : batches) {
      auto* d = std::get_if<DictStrings>(&b.column(c).data());
      if (d == nullptr || (shared && d->dictionary != shared)) {
        all_same_dict = false;
        break;
      }
      shared = d->dictionary;
    }
    DataType type = schema.field(c).type;
    if (all_same_dict) {
      DictStrings out{{}, shared};
      out.codes.reserve(total);
      for (const auto& b : batches) {
        const auto& codes = std::get<DictStrings>(b.column(c).data()).codes;
        out.codes.insert(out.codes.end(), codes.begin(), codes.end());
      }
      cols.emplace_back(type, std::move(out), std::move(validity));
      continue;
    }
    ColumnData out = empty_data(type);
    std::visit(
        [&](auto& dst) {
          using T = std::decay_t<decltype(dst)>;
          if constexpr (!std::is_same_v<T, DictStrings>) {
            dst.reserve(total);
            for (const auto& b : batches) {
              const Column& src = b.column(c);
              if constexpr (std::is_same_v<T, std::vector<std::string>>) {
                for (std::size_t r = 0; r < src.size(); ++r) dst.emplace_back(src.string_at(r));
              } else {
                const auto& v = std::get<T>(src.data());
                dst.insert(dst.end(), v.begin(), v.end());
              }
            }
          }
        },
        out);
    cols.emplace_back(type, std::move(out), std::move(validity));
  }
  return RowBatch(schema, std::move(cols));
}

RowBatchBuilder::RowBatchBuilder(Schema schema) : schema_(std::move(schema)) {
  for (const auto& f : schema_.fields()) data_.push_back(empty_data(f.type));
  validity_.resize(schema_.size());
  saw_null_.assign(schema_.size(), false);
}

RowBatchBuilder& RowBatchBuilder::add_row(const std::vector<Value>& row) {
  if (row.size() != schema_.size()) throw SchemaMismatch("row width does not match schema");
  for (std::size_t c = 0; c < row.size(); ++c) {
    const Value& v = row[c];
    bool null = is_null(v);
    if (null && !schema_.field(c).nullable) throw SchemaMismatch("null in non-nullable column");
    saw_null_[c] = saw_null_[c] || null;
    validity_[c].push_back(null ? 0 : 1);
    std::visit(
        [&](auto& dst) {
          using T = std::decay_t<decltype(dst)>;
          if constexpr (std::is_same_v<T, std::vector<std::int64_t>>) {
            dst.push_back(null ? 0 : (std::holds_alternative<double>(v) ? static_cast<std::int64_t>(std::get<double>(v))
                                                                         : std::get<std::int64_t>(v)));
          } else if constexpr (std::is_same_v<T, std::vector<std::int32_t>>) {
            dst.push_back(null ? 0 : static_cast<std::int32_t>(std::get<std::int64_t>(v)));
          } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            dst.push_back(null ? 0.0 : (std::holds_alternative<double>(v) ? std::get<double>(v)
                                                                          : static_cast<double>(std::get<std::int64_t>(v))));
          } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
            dst.push_back(null ? std::string() : std::get<std::string>(v));
          }
        },
        data_[c]);
  }
  ++rows_;
  return *this;
}

RowBatch RowBatchBuilder::build() {
  std::vector<Column> cols;
  for (std::size_t c = 0; c < schema_.size(); ++c) {
    cols.emplace_back(schema_.field(c).type, std::move(data_[c]),
                      saw_null_[c] ? std::move(validity_[c]) : std::vector<std::uint8_t>{});
  }
  RowBatch out(schema_, std::move(cols));
  *this = RowBatchBuilder(schema_);
  return out;
}

bool same_rows(const RowBatch& a, const RowBatch& b) {
  if (!(a.schema() == b.schema()) || a.num_rows() != b.num_rows()) return false;
  for (std::size_t c = 0; c < a.num_columns(); ++c) {
    for (std::size_t r = 0; r < a.num_rows(); ++r) {
      if (a.column(c).value(r) != b.column(c).value(r)) return false;
    }
  }
  return true;
}

}  // namespace cirrus::format
