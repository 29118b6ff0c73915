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
#include <vector>

#include "cirrus/datagen/tables.hpp"
#include "cirrus/exec/task.hpp"
#include "cirrus/mitigation/settings.hpp"
#include "cirrus/runtime/function_runtime.hpp"
#include "cirrus/store/latency.hpp"
#include "cirrus/store/pricing.hpp"

namespace cirrus::coord {

inline constexpr int kConfigFormatVersion = 1;

enum class ClockMode { kVirtual, kScaled };

/// Makes `task` of `stage` fail at `point` on its first `attempts` attempts.
struct FaultRule {
  std::string stage;
  std::uint32_t task = 0;
  exec::FaultPoint point = exec::FaultPoint::kBeforeWrite;
  std::uint32_t attempts = 1;
};

/// Holds `task` of `stage` back for `ms` before it writes.
struct DelayRule {
  std::string stage;
  std::uint32_t task = 0;
  double ms = 0.0;
};

struct RunConfig {
  std::uint64_t seed = 1;
  ClockMode clock = ClockMode::kVirtual;
  /// Scaled clock only: real seconds per simulated second.
  double time_scale = 0.001;
  store::StoreProfile store;
  store::PriceSheet prices;
  runtime::RuntimeLimits limits;
  mitigation::MitigationSettings mitigation;
  bool pipelining = false;
  double pipeline_threshold = 0.9;
  std::uint32_t retries = 2;
  double cpu_ns_per_row = 50.0;
  double cores_per_task = 2.0;
  std::uint64_t head_range = format::kDefaultHeadRangeBytes;
  datagen::DatagenOptions data;
  std::vector<FaultRule> faults;
  std::vector<DelayRule> delays;
  /// Replaces the task count of every non-terminal stage.
  std::optional<std::uint32_t> task_override;

  /// Desk-scale defaults: lognormal request times without tails and a cap
  /// of 64 concurrent invocations.
  static RunConfig defaults();
  void validate() const;
};

store::StoreProfile default_store_profile();

/// Throws ConfigError.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& config);

store::Distribution parse_distribution_json(const std::string& json_text);

}  // namespace cirrus::coord
