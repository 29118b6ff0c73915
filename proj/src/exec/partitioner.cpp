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

#include "cirrus/exec/partitioner.hpp"

#include <bit>

#include "cirrus/errors.hpp"
#include "cirrus/store/random.hpp"

namespace cirrus::exec {

std::string HashPartitioner::id() const {
  return std::string(kHashFunctionName) + "/seed=" + std::to_string(seed) + "/n=" + std::to_string(count);
}

std::uint64_t HashPartitioner::hash_row(const std::vector<const Column*>& key_columns, std::size_t row) const {
  std::uint64_t h = seed;
  for (const Column* c : key_columns) {
    std::uint64_t v;
    if (!c->valid(row)) {
      v = 0x6e756c6cULL;
    } else if (c->type() == DataType::kString) {
      v = store::fnv1a(c->string_at(row));
    } else if (c->type() == DataType::kFloat64) {
      double d = c->float_at(row);
      if (d == 0.0) d = 0.0;
      v = std::bit_cast<std::uint64_t>(d);
    } else {
      v = static_cast<std::uint64_t>(c->int_at(row));
    }
    h = store::hash_combine(h, v);
  }
  return h;
}

std::vector<std::uint32_t> HashPartitioner::assign(const RowBatch& batch) const {
  if (count == 0) throw PartitionMismatch("partition count must be positive");
  std::vector<const Column*> cols;
  for (const auto& k : keys) cols.push_back(&batch.column(k));
  std::vector<std::uint32_t> out(batch.num_rows());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = static_cast<std::uint32_t>(hash_row(cols, r) % count);
  return out;
}

std::vector<RowBatch> HashPartitioner::split(const RowBatch& batch) const {
  auto ids = assign(batch);
  std::vector<std::vector<std::uint32_t>> rows(count);
  for (std::size_t r = 0; r < ids.size(); ++r) rows[ids[r]].push_back(static_cast<std::uint32_t>(r));
  std::vector<RowBatch> out;
  out.reserve(count);
  for (auto& idx : rows) out.push_back(batch.take(idx));
  return out;
}

std::uint64_t query_hash_seed(const std::string& query_id) { return store::splitmix64(store::fnv1a(query_id)); }

}  // namespace cirrus::exec
