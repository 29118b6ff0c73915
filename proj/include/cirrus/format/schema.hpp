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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cirrus::format {

/// Logical column types. Dictionary encoding is a physical representation of
/// kString chosen at write time, not a separate logical type.
enum class DataType : std::uint8_t {
  kInt64 = 1,
  kFloat64 = 2,
  kDate32 = 3,  // days since 1970-01-01
  kString = 4,
};

std::string_view to_string(DataType type);
DataType data_type_from_string(std::string_view name);

struct Field {
  std::string name;
  DataType type = DataType::kInt64;
  bool nullable = false;

  bool operator==(const Field&) const = default;
};

class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<Field> fields);

  const std::vector<Field>& fields() const { return fields_; }
  std::size_t size() const { return fields_.size(); }
  const Field& field(std::size_t i) const { return fields_.at(i); }

  std::optional<std::size_t> find(std::string_view name) const;
  /// Throws UnknownColumn.
  std::size_t index_of(std::string_view name) const;

  std::string describe() const;
  bool operator==(const Schema&) const = default;

 private:
  std::vector<Field> fields_;
};

}  // namespace cirrus::format
