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

#include "cirrus/mitigation/models.hpp"
#include "cirrus/store/pricing.hpp"

namespace cirrus::mitigation {

struct MitigationSettings {
  /// Concurrent GETs per task. 1 disables parallel reads.
  std::uint32_t parallel_reads = 16;
  bool rsm = true;
  WsmMode wsm = WsmMode::kFull;
  bool doublewrite = true;
  double retry_factor = 2.0;
  StragglerModel read_model;
  WriteModel write_model;
  double poll_interval_ms = 20.0;
  double poll_budget_ms = 60000.0;

  /// Every technique disabled; reads run one at a time.
  static MitigationSettings off();
  void validate() const;
  std::string describe() const;
};

struct MitigationStats {
  std::uint64_t reads_total = 0;
  std::uint64_t reads_hedged = 0;
  std::uint64_t writes_total = 0;
  std::uint64_t writes_hedged = 0;
  /// Object reads served by the secondary key.
  std::uint64_t doublewrite_fallbacks = 0;
  /// Object reads whose first attempt on every key missed.
  std::uint64_t both_invisible = 0;
  /// Extra PUTs issued to secondary keys.
  std::uint64_t doublewrite_puts = 0;
  /// GETs spent polling after the first attempts missed.
  std::uint64_t poll_gets = 0;
  double visibility_wait_ms = 0.0;
  double compute_ms_saved = 0.0;
  std::uint32_t peak_in_flight = 0;

  /// Hedged GETs and PUTs plus doublewrite PUTs at the given prices.
  double extra_request_dollars(const store::PriceSheet& prices) const;
  void merge(const MitigationStats& other);
};

}  // namespace cirrus::mitigation
