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
#include <optional>
#include <string>
#include <vector>

#include "cirrus/exec/expr.hpp"

namespace cirrus::exec {

enum class AggFn { kSum, kCount, kMin, kMax, kAvg };

std::string_view to_string(AggFn fn);
AggFn agg_fn_from_string(std::string_view s);

struct AggItem {
  AggFn fn = AggFn::kCount;
  /// Absent only for count(*).
  std::optional<Expr> expr;
  std::string name;
};

struct AggSpec {
  std::vector<std::string> group_by;
  std::vector<AggItem> aggs;
};

/// Group columns followed by one state column per aggregate, except avg,
/// which is carried as `<name>__sum` (float64) and `<name>__count` (int64).
Schema partial_schema(const AggSpec& spec, const Schema& input);
/// Group columns followed by one finalized column per aggregate.
Schema final_schema(const AggSpec& spec, const Schema& partial);

/// Hash aggregation. Groups come out in first-appearance order; sums add in
/// input order. Nulls are skipped. Without group-by columns exactly one row
/// is produced, holding the identity (sum 0, count 0, min/max null) when no
/// input arrived.
class Aggregator {
 public:
  enum class Mode { kPartial, kFinal };

  /// For kFinal, `input` must equal partial_schema(spec, ·); otherwise
  /// SpecMismatch.
  Aggregator(AggSpec spec, const Schema& input, Mode mode);
  ~Aggregator();
  Aggregator(Aggregator&&) noexcept;

  void add(const RowBatch& batch);
  RowBatch finish();

  std::size_t group_count() const;
  /// Rough footprint of the hash table, for memory reservations.
  std::uint64_t estimated_bytes() const;
  const Schema& output_schema() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cirrus::exec
