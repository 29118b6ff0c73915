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

#include "cirrus/store/latency.hpp"

#include <stdexcept>

namespace cirrus::store {
namespace {

constexpr std::uint64_t kVisibilitySalt = 0x5649534942494c31ULL;  // "VISIBIL1"

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void LatencyProfile::validate() const {
  if (!is_probability(tail_probability) || !is_probability(visibility_delay_probability))
    throw std::invalid_argument("latency profile probabilities must lie in [0, 1]");
  if (!(per_byte_time_s >= 0.0)) throw std::invalid_argument("per_byte_time must be non-negative");
}

LatencyProfile LatencyProfile::zero() { return LatencyProfile{}; }

LatencyProfile LatencyProfile::fixed(double base_ms) {
  LatencyProfile p;
  p.base = PointMass{base_ms};
  return p;
}

void StoreProfile::reseed(std::uint64_t seed) {
  get.rng_seed = hash_combine(seed, 1);
  put.rng_seed = hash_combine(seed, 2);
}

RequestTiming sample_request_timing(const LatencyProfile& profile, std::uint64_t bytes, std::uint64_t call_index,
                                    double share) {
  StreamRng rng(hash_combine(profile.rng_seed, call_index));
  RequestTiming timing;
  timing.service_ms = profile.base.sample(rng);
  timing.transfer_ms = static_cast<double>(bytes) * profile.per_byte_time_s * 1000.0 * share;
  // Always draw, so the tail decision never shifts later draws.
  double u = rng.uniform();
  if (u < profile.tail_probability) {
    timing.service_ms += profile.tail.sample(rng);
    timing.tail_hit = true;
  }
  return timing;
}

double sample_visibility_delay(const LatencyProfile& profile, std::uint64_t call_index) {
  if (profile.visibility_delay_probability <= 0.0) return 0.0;
  StreamRng rng(hash_combine(profile.rng_seed ^ kVisibilitySalt, call_index));
  if (rng.uniform() >= profile.visibility_delay_probability) return 0.0;
  return profile.visibility_delay.sample(rng);
}

}  // namespace cirrus::store
