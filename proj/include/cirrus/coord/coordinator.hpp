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
#include <optional>
#include <string>
#include <vector>

#include "cirrus/coord/config.hpp"
#include "cirrus/coord/plan.hpp"
#include "cirrus/datagen/tables.hpp"
#include "cirrus/errors.hpp"
#include "cirrus/runtime/function_runtime.hpp"
#include "cirrus/sim/executor.hpp"
#include "cirrus/store/ledger.hpp"
#include "cirrus/store/object_store.hpp"

namespace cirrus::coord {

store::ObjectKey stage_output_key(const std::string& query, const std::string& stage, std::uint64_t task);
store::ObjectKey result_key(const std::string& query);
std::string combiner_stage_id(const std::string& producer);

struct CompiledStage {
  std::string id;
  std::vector<std::string> dependencies;
  /// Fraction of each dependency's tasks that must finish before this stage
  /// starts; 1 unless pipelining is on.
  double start_threshold = 1.0;
  bool combiner = false;
  /// Set on combiner stages and on stages reading a multistage shuffle.
  std::optional<shuffle::ShuffleTopology> topology;
  format::Schema output_schema;
  std::vector<exec::TaskSpec> tasks;
};

struct CompiledPlan {
  std::string query;
  /// Topological order; combiner stages sit right after their producers.
  std::vector<CompiledStage> stages;
  store::ObjectKey result;
  format::Schema result_schema;

  const CompiledStage& stage(const std::string& id) const;
  /// Every object a run writes, known before any stage starts (primary keys
  /// only; doublewrite adds a secondary key per object).
  std::vector<store::ObjectKey> output_keys() const;
  std::size_t task_count() const;
};

/// Resolves inputs against the catalog, infers schemas, fixes task counts and
/// derives every task's inputs and output key. Throws PlanValidationError.
CompiledPlan compile_plan(const PhysicalPlan& plan, const datagen::Catalog& catalog, const RunConfig& config);

/// Executor, ledger, store and function runtime shared by the queries of one
/// run.
class Environment {
 public:
  explicit Environment(const RunConfig& config);
  ~Environment();

  void load(const datagen::GeneratedData& data);

  const RunConfig& config() const { return config_; }
  sim::Executor& executor() { return *executor_; }
  store::CostLedger& ledger() { return ledger_; }
  store::ObjectStore& store() { return *store_; }
  runtime::FunctionRuntime& runtime() { return *runtime_; }

 private:
  RunConfig config_;
  std::unique_ptr<sim::Executor> executor_;
  store::CostLedger ledger_;
  std::unique_ptr<store::ObjectStore> store_;
  std::unique_ptr<runtime::FunctionRuntime> runtime_;
};

struct StageReport {
  std::string id;
  std::uint32_t tasks = 0;
  double start_ms = 0.0;
  double end_ms = 0.0;
  double latency_ms = 0.0;
  std::uint32_t retries = 0;
  std::uint64_t rows_out = 0;
  std::uint64_t bytes_written = 0;
};

struct QueryReport {
  std::string query;
  bool ok = false;
  std::string error;
  double start_ms = 0.0;
  double end_ms = 0.0;
  double wall_ms = 0.0;
  std::vector<StageReport> stages;
  store::CostSummary cost;
  mitigation::MitigationStats mitigation;
  /// Sum of task durations times cores per task.
  double core_seconds = 0.0;
  std::uint32_t retries = 0;
  format::RowBatch result;

  std::string to_json() const;
  std::string to_table() const;
};

/// Raised by callers that need success; carries the partial report.
class QueryFailed : public Error {
 public:
  explicit QueryFailed(QueryReport report) : Error("query " + report.query + " failed: " + report.error), report_(std::move(report)) {}
  const QueryReport& report() const { return report_; }

 private:
  QueryReport report_;
};

/// Runs one compiled plan to completion. Must be called from a process of
/// env.executor(). Never throws for task failures; see QueryReport::ok.
QueryReport execute(const CompiledPlan& plan, Environment& env);

/// Runs every plan concurrently on env's shared runtime and returns reports
/// in input order. Drives env.executor() itself.
std::vector<QueryReport> run_concurrent(const std::vector<CompiledPlan>& plans, Environment& env);

/// Builds an environment, loads `data`, compiles and executes one plan.
QueryReport run_query(const PhysicalPlan& plan, const datagen::GeneratedData& data, const RunConfig& config);

/// Result rows as CSV with a header line.
std::string result_csv(const format::RowBatch& result);
/// One line per metered request of `query` (all queries when empty).
std::string request_trace_csv(const store::CostLedger& ledger, const std::string& query = {});

}  // namespace cirrus::coord
