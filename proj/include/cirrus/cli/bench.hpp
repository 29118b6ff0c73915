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

#include "cirrus/coord/coordinator.hpp"
#include "cirrus/shuffle/topology.hpp"

namespace cirrus::bench {

inline const std::vector<std::string>& bench_kinds() {
  static const std::vector<std::string> kinds = {"read-cdf", "write-cdf", "ablation", "shuffle-cost", "tradeoff"};
  return kinds;
}

/// Completion times of one request series.
struct Series {
  std::string mode;
  std::vector<double> ms;
};

/// `reads` sequential GETs of one `object_bytes` object, once with RSM off
/// and once on ("off", "rsm"). Other mitigation settings come from `config`.
std::vector<Series> read_cdf(const coord::RunConfig& config, std::size_t reads, std::uint64_t object_bytes);

/// `writes` sequential PUTs under WSM off, single and full.
std::vector<Series> write_cdf(const coord::RunConfig& config, std::size_t writes, std::uint64_t object_bytes);

std::string series_csv(const std::vector<Series>& series);

/// Cumulative settings: nothing, then parallel reads, RSM, WSM and doublewrite.
std::vector<std::pair<std::string, mitigation::MitigationSettings>> ablation_steps(
    const mitigation::MitigationSettings& enabled);

struct RunPoint {
  std::string label;
  std::uint64_t seed = 0;
  std::uint32_t tasks = 0;
  bool ok = false;
  double latency_ms = 0.0;
  double dollars = 0.0;
  std::uint64_t gets = 0;
  std::uint64_t puts = 0;
  std::string result_csv;
};

/// Every ablation step run once per seed on the same data.
std::vector<RunPoint> ablation(const coord::PhysicalPlan& plan, const datagen::GeneratedData& data,
                               const coord::RunConfig& config, const std::vector<std::uint64_t>& seeds);

/// The plan re-run with each non-terminal task count.
std::vector<RunPoint> tradeoff(const coord::PhysicalPlan& plan, const datagen::GeneratedData& data,
                               const coord::RunConfig& config, const std::vector<std::uint32_t>& task_counts);

std::string run_points_csv(const std::vector<RunPoint>& points);

struct ShuffleCostRow {
  shuffle::ShuffleTopology topology;
  shuffle::ShuffleCostEstimate estimate;
};

/// Standard and default multistage topologies over a grid of (s, r), plus
/// the worked sizes 512x128 and 5120x1280.
std::vector<ShuffleCostRow> shuffle_cost_sweep(const store::PriceSheet& prices, bool doublewrite);
std::string shuffle_cost_csv(const std::vector<ShuffleCostRow>& rows);

}  // namespace cirrus::bench
