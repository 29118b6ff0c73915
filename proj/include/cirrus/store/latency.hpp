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

#include "cirrus/sim/clock.hpp"
#include "cirrus/store/distribution.hpp"

namespace cirrus::store {

/// Per-request latency model.
///
/// A request's total time is base + bytes * per_byte_time * share, plus a tail
/// sample with probability tail_probability. `share` is the number of requests
/// the issuing invocation has in flight: they split its network bandwidth.
/// For PUTs the transfer term is the send phase and base + tail is the
/// post-send wait for the service to acknowledge.
struct LatencyProfile {
  Distribution base;
  double per_byte_time_s = 0.0;
  double tail_probability = 0.0;
  Distribution tail;
  double visibility_delay_probability = 0.0;
  Distribution visibility_delay;
  std::uint64_t rng_seed = 0;

  void validate() const;

  static LatencyProfile zero();
  /// Constant base latency, nothing else.
  static LatencyProfile fixed(double base_ms);
};

/// GET and PUT traffic are modelled separately.
struct StoreProfile {
  LatencyProfile get;
  LatencyProfile put;

  static StoreProfile zero() { return {LatencyProfile::zero(), LatencyProfile::zero()}; }
  void reseed(std::uint64_t seed);
};

struct RequestTiming {
  double transfer_ms = 0.0;  // bytes * per_byte_time * share
  double service_ms = 0.0;   // base + optional tail
  bool tail_hit = false;

  double total_ms() const { return transfer_ms + service_ms; }
  sim::SimDuration total() const { return sim::from_ms(total_ms()); }
};

/// Samples request `call_index` of `profile`. Pure function of
/// (profile.rng_seed, call_index, bytes, share).
RequestTiming sample_request_timing(const LatencyProfile& profile, std::uint64_t bytes, std::uint64_t call_index,
                                    double share = 1.0);

/// Convenience wrapper returning only the total, in milliseconds.
inline double sample_request_time(const LatencyProfile& profile, std::uint64_t bytes, std::uint64_t call_index) {
  return sample_request_timing(profile, bytes, call_index).total_ms();
}

/// Delay between a PUT completing and its object becoming visible to GETs.
double sample_visibility_delay(const LatencyProfile& profile, std::uint64_t call_index);

}  // namespace cirrus::store
