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

#include "cirrus/format/schema.hpp"

#include <sstream>
#include <unordered_set>

#include "cirrus/errors.hpp"

namespace cirrus::format {

std::string_view to_string(DataType type) {
  switch (type) {
    case DataType::kInt64:
      return "int64";
    case DataType::kFloat64:
      return "float64";
    case DataType::kDate32:
      return "date32";
    case DataType::kString:
      return "string";
  }
  return "unknown";
}

DataType data_type_from_string(std::string_view name) {
  if (name == "int64") return DataType::kInt64;
  if (name == "float64") return DataType::kFloat64;
  if (name == "date32" || name == "date") return DataType::kDate32;
  if (name == "string" || name == "dict-string") return DataType::kString;
  throw SchemaMismatch("unknown column type '" + std::string(name) + "'");
}

Schema::Schema(std::vector<Field> fields) : fields_(std::move(fields)) {
  if (fields_.empty()) throw SchemaMismatch("schema needs at least one column");
  std::unordered_set<std::string_view> seen;
  for (const auto& f : fields_) {
    if (f.name.empty()) throw SchemaMismatch("column names must be non-empty");
    if (!seen.insert(f.name).second) throw SchemaMismatch("duplicate column name '" + f.name + "'");
  }
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
  for (std::size_t i = 0; i < fields_.size(); ++i) {
    if (fields_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Schema::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw UnknownColumn("unknown column '" + std::string(name) + "' in " + describe());
}

std::string Schema::describe() const {
  std::ostringstream out;
  out << "(";
  for (std::size_t i = 0; i < fields_.size(); ++i) {
    if (i) out << ", ";
    out << fields_[i].name << ":" << to_string(fields_[i].type) << (fields_[i].nullable ? "?" : "");
  }
  out << ")";
  return out.str();
}

}  // namespace cirrus::format
