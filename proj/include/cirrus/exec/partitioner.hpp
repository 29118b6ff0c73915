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
#include <string>
#include <vector>

#include "cirrus/exec/expr.hpp"

namespace cirrus::exec {

inline constexpr const char* kHashFunctionName = "fnv1a-splitmix64";

/// Hash partitioning on key columns. Integers and dates hash by value, so an
/// int64 key and a date32 key with equal values land in the same partition.
struct HashPartitioner {
  std::vector<std::string> keys;
  std::uint32_t count = 1;
  std::uint64_t seed = 0;

  /// Names the hash function, seed and partition count. Inputs joined
  /// partition-by-partition must agree on it.
  std::string id() const;

  std::uint64_t hash_row(const std::vector<const Column*>& key_columns, std::size_t row) const;
  std::vector<std::uint32_t> assign(const RowBatch& batch) const;
  /// One batch per partition, rows in input order.
  std::vector<RowBatch> split(const RowBatch& batch) const;
};

/// Per-query seed derived from the query id.
std::uint64_t query_hash_seed(const std::string& query_id);

}  // namespace cirrus::exec
