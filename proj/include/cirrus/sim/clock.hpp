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

#include <chrono>
#include <cmath>
#include <cstdint>

namespace cirrus::sim {

/// Simulated time. Microsecond resolution keeps event ordering exact while
/// sampled latencies stay continuous enough for percentile reporting.
struct SimClock {
  using rep = std::int64_t;
  using period = std::micro;
  using duration = std::chrono::microseconds;
  using time_point = std::chrono::time_point<SimClock>;
  static constexpr bool is_steady = true;
};

using SimDuration = SimClock::duration;
using SimTime = SimClock::time_point;

inline constexpr SimTime kEpoch{};

inline SimDuration from_ms(double ms) { return SimDuration{static_cast<std::int64_t>(std::llround(ms * 1000.0))}; }

inline double to_ms(SimDuration d) { return static_cast<double>(d.count()) / 1000.0; }

inline double to_ms(SimTime t) { return to_ms(t.time_since_epoch()); }

}  // namespace cirrus::sim
