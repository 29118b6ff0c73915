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

#include "cirrus/exec/join.hpp"

#include <unordered_map>

#include "cirrus/errors.hpp"

namespace cirrus::exec {
namespace {

enum class KeyClass { kInteger, kFloat, kString };

KeyClass key_class(DataType t) {
  if (t == DataType::kString) return KeyClass::kString;
  if (t == DataType::kFloat64) return KeyClass::kFloat;
  return KeyClass::kInteger;
}

// False when the key has a null component.
bool encode_key(const std::vector<const Column*>& cols, std::size_t r, std::string& out) {
  out.clear();
  for (const Column* c : cols) {
    if (!c->valid(r)) return false;
    switch (key_class(c->type())) {
      case KeyClass::kString: {
        auto s = c->string_at(r);
        auto n = static_cast<std::uint32_t>(s.size());
        out.append(reinterpret_cast<const char*>(&n), sizeof n);
        out.append(s);
        break;
      }
      case KeyClass::kFloat: {
        double d = c->float_at(r);
        if (d == 0.0) d = 0.0;
        out.append(reinterpret_cast<const char*>(&d), sizeof d);
        break;
      }
      case KeyClass::kInteger: {
        std::int64_t i = c->int_at(r);
        out.append(reinterpret_cast<const char*>(&i), sizeof i);
        break;
      }
    }
  }
  return true;
}

std::vector<const Column*> key_columns(const RowBatch& b, const std::vector<std::string>& keys) {
  std::vector<const Column*> out;
  for (const auto& k : keys) out.push_back(&b.column(k));
  return out;
}

}  // namespace

std::string_view to_string(JoinStrategy s) { return s == JoinStrategy::kBroadcast ? "broadcast" : "partitioned"; }

JoinStrategy join_strategy_from_string(std::string_view s) {
  if (s == "broadcast") return JoinStrategy::kBroadcast;
  if (s == "partitioned") return JoinStrategy::kPartitioned;
  throw SpecMismatch("join strategy must be broadcast or partitioned, got '" + std::string(s) + "'");
}

Schema join_schema(const Schema& probe, const Schema& build, const std::vector<std::string>& probe_keys,
                   const std::vector<std::string>& build_keys) {
  if (probe_keys.empty() || probe_keys.size() != build_keys.size())
    throw SpecMismatch("join needs the same non-zero number of probe and build keys");
  for (std::size_t i = 0; i < probe_keys.size(); ++i) {
    auto pt = probe.field(probe.index_of(probe_keys[i])).type;
    auto bt = build.field(build.index_of(build_keys[i])).type;
    if (key_class(pt) != key_class(bt))
      throw SpecMismatch("join key types differ: " + probe_keys[i] + " vs " + build_keys[i]);
  }
  std::vector<format::Field> fields = probe.fields();
  fields.insert(fields.end(), build.fields().begin(), build.fields().end());
  try {
    return Schema(std::move(fields));
  } catch (const SchemaMismatch& e) {
    throw SpecMismatch(std::string("join output: ") + e.what());
  }
}

struct HashJoin::Impl {
  RowBatch build;
  std::vector<std::string> build_keys;
  std::vector<std::string> probe_keys;
  Schema probe_schema;
  Schema output;
  std::unordered_map<std::string, std::vector<std::uint32_t>> table;
  std::uint64_t key_bytes = 0;
};

HashJoin::HashJoin(std::span<const RowBatch> build, const Schema& build_schema, std::vector<std::string> build_keys,
                   const Schema& probe_schema, std::vector<std::string> probe_keys)
    : impl_(std::make_unique<Impl>()) {
  auto& im = *impl_;
  im.output = join_schema(probe_schema, build_schema, probe_keys, build_keys);
  im.build = build.empty() ? RowBatch::empty(build_schema) : format::concat(build, build_schema);
  im.build_keys = std::move(build_keys);
  im.probe_keys = std::move(probe_keys);
  im.probe_schema = probe_schema;
  auto cols = key_columns(im.build, im.build_keys);
  std::string key;
  for (std::size_t r = 0; r < im.build.num_rows(); ++r) {
    if (!encode_key(cols, r, key)) continue;
    auto [it, inserted] = im.table.try_emplace(key);
    if (inserted) im.key_bytes += key.size();
    it->second.push_back(static_cast<std::uint32_t>(r));
  }
}

HashJoin::~HashJoin() = default;
HashJoin::HashJoin(HashJoin&&) noexcept = default;

RowBatch HashJoin::probe(const RowBatch& batch) const {
  const auto& im = *impl_;
  if (!(batch.schema() == im.probe_schema)) throw SpecMismatch("probe input schema does not match the join");
  auto cols = key_columns(batch, im.probe_keys);
  std::vector<std::uint32_t> probe_rows, build_rows;
  std::string key;
  for (std::size_t r = 0; r < batch.num_rows(); ++r) {
    if (!encode_key(cols, r, key)) continue;
    auto it = im.table.find(key);
    if (it == im.table.end()) continue;
    for (auto b : it->second) {
      probe_rows.push_back(static_cast<std::uint32_t>(r));
      build_rows.push_back(b);
    }
  }
  auto left = batch.take(probe_rows);
  auto right = im.build.take(build_rows);
  std::vector<Column> out = left.columns();
  out.insert(out.end(), right.columns().begin(), right.columns().end());
  return RowBatch(im.output, std::move(out));
}

const Schema& HashJoin::output_schema() const { return impl_->output; }
std::size_t HashJoin::build_rows() const { return impl_->build.num_rows(); }

std::uint64_t HashJoin::estimated_bytes() const {
  return impl_->build.estimated_bytes() + impl_->key_bytes + impl_->table.size() * 48;
}

}  // namespace cirrus::exec
