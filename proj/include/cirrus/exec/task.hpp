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
#include <variant>
#include <vector>

#include "cirrus/exec/aggregate.hpp"
#include "cirrus/exec/expr.hpp"
#include "cirrus/exec/join.hpp"
#include "cirrus/exec/partitioner.hpp"
#include "cirrus/format/base_table.hpp"
#include "cirrus/format/partitioned_object.hpp"
#include "cirrus/mitigation/store_client.hpp"
#include "cirrus/runtime/function_runtime.hpp"
#include "cirrus/store/object_store.hpp"

namespace cirrus::exec {

/// Base-table objects assigned to this task.
struct ScanSource {
  std::vector<store::ObjectKey> objects;
  /// Empty reads every column.
  std::vector<std::string> columns;
  Schema table_schema;
  std::optional<format::PruningPredicate> prune;
};

/// Partitioned intermediate objects; `range` is read from each of them.
struct ObjectSource {
  std::vector<store::ObjectKey> objects;
  format::PartitionRange range = format::PartitionRange::all();
  Schema schema;
  /// HashPartitioner::id() of the writers, when they hash-partitioned.
  std::optional<std::string> partitioner_id;
};

using Source = std::variant<ScanSource, ObjectSource>;

struct FilterOp {
  Expr predicate;
};

struct ProjectItem {
  std::string name;
  Expr expr;
};

struct ProjectOp {
  std::vector<ProjectItem> items;
};

struct JoinOp {
  ObjectSource build;
  std::vector<std::string> build_keys;
  std::vector<std::string> probe_keys;
  JoinStrategy strategy = JoinStrategy::kBroadcast;
};

struct PartialAggOp {
  AggSpec spec;
};

struct FinalAggOp {
  AggSpec spec;
};

struct OrderKey {
  std::string column;
  bool descending = false;
};

struct OrderByOp {
  std::vector<OrderKey> keys;
  std::optional<std::uint64_t> limit;
};

using Operator = std::variant<FilterOp, ProjectOp, JoinOp, PartialAggOp, FinalAggOp, OrderByOp>;

struct PartitionSink {
  HashPartitioner partitioner;
};

/// One partition holding every output row.
struct SingleSink {};

/// Re-emits the source's partitions, each the concatenation of that partition
/// across the source objects. Used by shuffle combiners.
struct CombineSink {};

using Sink = std::variant<PartitionSink, SingleSink, CombineSink>;

enum class FaultPoint { kNone, kBeforeWrite, kAfterWrite };

/// Everything a worker needs. Output keys are fixed by (query, stage, task)
/// before the stage starts, so a retried task overwrites the same object.
struct TaskSpec {
  std::string query_id;
  std::string stage;
  std::uint32_t task_index = 0;
  std::uint32_t attempt = 0;
  Source source;
  std::vector<Operator> ops;
  Sink sink = SingleSink{};
  store::ObjectKey output;
  mitigation::MitigationSettings mitigation;
  std::uint64_t head_range = format::kDefaultHeadRangeBytes;
  /// Simulated CPU time charged per input row.
  double cpu_ns_per_row = 0.0;
  /// Extra simulated time before the task writes, for straggler experiments.
  double extra_delay_ms = 0.0;
  FaultPoint fault = FaultPoint::kNone;

  std::string requester() const;
};

Schema source_schema(const Source& source);
/// Static schema inference through the operator list. Throws SpecMismatch,
/// UnknownColumn or PartitionMismatch.
Schema pipeline_schema(const Schema& input, const std::vector<Operator>& ops);

struct TaskOutputSummary {
  std::uint64_t rows_in = 0;
  std::uint64_t rows_out = 0;
  std::uint64_t bytes_written = 0;
  std::uint32_t objects_written = 0;
  mitigation::MitigationStats stats;
};

/// Runs one task against the store. `ctx` receives memory reservations; it
/// may be null outside the function runtime.
TaskOutputSummary run_task(const TaskSpec& spec, store::ObjectStore& store, runtime::InvocationContext* ctx);

/// Applies one non-join operator to materialized batches. Exposed for tests.
std::vector<RowBatch> apply_operator(const Operator& op, std::vector<RowBatch> input, const Schema& input_schema);

}  // namespace cirrus::exec
