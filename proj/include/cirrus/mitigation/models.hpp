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
#include <string_view>

#include "cirrus/store/pricing.hpp"

namespace cirrus::mitigation {

/// Expected response time r = l + b*c/t: c concurrent requests share the
/// invocation's throughput t, so each one slows as c grows.
struct StragglerModel {
  double l_ms = 15.0;
  double t_bytes_per_s = 150e6;

  void validate() const;
};

double expected_response(const StragglerModel& model, std::uint64_t bytes, std::uint32_t concurrent);

/// Writes are judged twice: from the request start against `pre_send`, and
/// from the moment the payload has been sent against `post_send`.
struct WriteModel {
  StragglerModel pre_send{15.0, 150e6};
  StragglerModel post_send{50.0, 1e9};

  void validate() const;
};

enum class WsmMode { kOff, kSingle, kFull };

std::string_view to_string(WsmMode mode);
WsmMode wsm_mode_from_string(std::string_view s);

/// Milliseconds a duplicate request must save before it pays for itself.
inline double get_break_even_ms(const store::PriceSheet& prices) {
  return prices.get_price / prices.invocation_price_per_ms;
}
inline double put_break_even_ms(const store::PriceSheet& prices) {
  return prices.put_price / prices.invocation_price_per_ms;
}

}  // namespace cirrus::mitigation
