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
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cirrus/exec/task.hpp"
#include "cirrus/shuffle/topology.hpp"

namespace cirrus::coord {

inline constexpr int kPlanFormatVersion = 1;

struct ScanInput {
  std::string table;
  /// Empty reads every column.
  std::vector<std::string> columns;
};

/// How a consumer reads a hash-partitioned producer. Multistage fractions are
/// optional; when absent the split is chosen from the stage sizes.
struct ShuffleSpec {
  shuffle::ShuffleKind kind = shuffle::ShuffleKind::kStandard;
  std::optional<shuffle::UnitFraction> p;
  std::optional<shuffle::UnitFraction> f;

  bool operator==(const ShuffleSpec&) const = default;
};

/// Consumer task i reads partition i of every producer object.
struct ShuffleInput {
  std::string stage;
  ShuffleSpec shuffle;
};

/// Every consumer task reads the producer's objects in full.
struct GatherInput {
  std::string stage;
};

using StageInput = std::variant<ScanInput, ShuffleInput, GatherInput>;

struct JoinDef {
  /// Build inputs come from upstream stages (shuffle or gather).
  StageInput build;
  std::vector<std::string> build_keys;
  std::vector<std::string> probe_keys;
  exec::JoinStrategy strategy = exec::JoinStrategy::kBroadcast;
};

using OpDef = std::variant<exec::FilterOp, exec::ProjectOp, JoinDef, exec::PartialAggOp, exec::FinalAggOp,
                           exec::OrderByOp>;

struct PartitionSinkDef {
  std::vector<std::string> keys;
};
struct SingleSinkDef {};
/// The query result: one task writing one partition at the result key.
struct ResultSinkDef {};

using SinkDef = std::variant<PartitionSinkDef, SingleSinkDef, ResultSinkDef>;

struct StageDef {
  std::string id;
  std::uint32_t tasks = 1;
  StageInput source;
  std::vector<OpDef> ops;
  SinkDef sink = SingleSinkDef{};
  /// Overrides the run's pipelining threshold for this stage's start.
  std::optional<double> pipeline_threshold;
  /// Extra ordering edges beyond those implied by inputs.
  std::vector<std::string> depends_on;
};

struct PhysicalPlan {
  std::string query;
  std::vector<StageDef> stages;

  const StageDef& stage(const std::string& id) const;
  /// Upstream stage ids of `stage`, inputs first, without duplicates.
  std::vector<std::string> dependencies(const StageDef& stage) const;
  std::size_t edge_count() const;
  /// Stage ids with dependencies before dependents; ties keep file order.
  std::vector<std::string> topological_order() const;
  const StageDef& terminal() const;
};

/// Throws PlanValidationError naming the offending stage.
PhysicalPlan parse_plan(const std::string& json_text);
PhysicalPlan load_plan(const std::filesystem::path& path);
std::string plan_to_json(const PhysicalPlan& plan);

/// Structural checks only (ids, references, cycles, terminal stage, sinks,
/// build sides, fractions). Schema checks need a catalog; see compile_plan.
void validate_plan(const PhysicalPlan& plan);

exec::Expr parse_expr_json(const std::string& json_text);

}  // namespace cirrus::coord
