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

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cirrus/exec/expr.hpp"

namespace cirrus::exec {

enum class JoinStrategy { kBroadcast, kPartitioned };

std::string_view to_string(JoinStrategy s);
JoinStrategy join_strategy_from_string(std::string_view s);

/// Probe columns followed by build columns. Throws SpecMismatch on duplicate
/// names or incompatible key types.
Schema join_schema(const Schema& probe, const Schema& build, const std::vector<std::string>& probe_keys,
                   const std::vector<std::string>& build_keys);

/// Inner equi-join. The hash table holds the build side; probing emits, for
/// each probe row in order, its matches in build order. Null keys never match.
class HashJoin {
 public:
  HashJoin(std::span<const RowBatch> build, const Schema& build_schema, std::vector<std::string> build_keys,
           const Schema& probe_schema, std::vector<std::string> probe_keys);
  ~HashJoin();
  HashJoin(HashJoin&&) noexcept;

  RowBatch probe(const RowBatch& batch) const;

  const Schema& output_schema() const;
  std::size_t build_rows() const;
  std::uint64_t estimated_bytes() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cirrus::exec
