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

#include "cirrus/mitigation/models.hpp"

#include <sstream>
#include <stdexcept>

#include "cirrus/errors.hpp"
#include "cirrus/mitigation/settings.hpp"

namespace cirrus::mitigation {

void StragglerModel::validate() const {
  if (!(l_ms > 0) || !(t_bytes_per_s > 0)) throw ConfigError("straggler model needs l > 0 and t > 0");
}

double expected_response(const StragglerModel& model, std::uint64_t bytes, std::uint32_t concurrent) {
  if (concurrent == 0) concurrent = 1;
  return model.l_ms + static_cast<double>(bytes) * concurrent / model.t_bytes_per_s * 1000.0;
}

void WriteModel::validate() const {
  pre_send.validate();
  post_send.validate();
  if (post_send.t_bytes_per_s < pre_send.t_bytes_per_s)
    throw ConfigError("post-send throughput must be at least the pre-send throughput");
}

std::string_view to_string(WsmMode mode) {
  switch (mode) {
    case WsmMode::kOff:
      return "off";
    case WsmMode::kSingle:
      return "single";
    case WsmMode::kFull:
      return "full";
  }
  return "?";
}

WsmMode wsm_mode_from_string(std::string_view s) {
  if (s == "off") return WsmMode::kOff;
  if (s == "single") return WsmMode::kSingle;
  if (s == "full") return WsmMode::kFull;
  throw ConfigError("wsm must be off, single or full, got '" + std::string(s) + "'");
}

MitigationSettings MitigationSettings::off() {
  MitigationSettings m;
  m.parallel_reads = 1;
  m.rsm = false;
  m.wsm = WsmMode::kOff;
  m.doublewrite = false;
  return m;
}

void MitigationSettings::validate() const {
  if (parallel_reads == 0) throw ConfigError("parallel_reads must be at least 1");
  if (!(retry_factor > 1.0)) throw ConfigError("retry_factor must exceed 1");
  if (!(poll_interval_ms > 0) || !(poll_budget_ms >= 0)) throw ConfigError("bad doublewrite polling settings");
  read_model.validate();
  write_model.validate();
}

std::string MitigationSettings::describe() const {
  std::ostringstream out;
  out << "parallel_reads=" << parallel_reads << " rsm=" << (rsm ? "on" : "off") << " wsm=" << to_string(wsm)
      << " doublewrite=" << (doublewrite ? "on" : "off") << " k=" << retry_factor;
  return out.str();
}

double MitigationStats::extra_request_dollars(const store::PriceSheet& prices) const {
  return static_cast<double>(reads_hedged) * prices.get_price +
         static_cast<double>(writes_hedged + doublewrite_puts) * prices.put_price;
}

void MitigationStats::merge(const MitigationStats& o) {
  reads_total += o.reads_total;
  reads_hedged += o.reads_hedged;
  writes_total += o.writes_total;
  writes_hedged += o.writes_hedged;
  doublewrite_fallbacks += o.doublewrite_fallbacks;
  both_invisible += o.both_invisible;
  doublewrite_puts += o.doublewrite_puts;
  poll_gets += o.poll_gets;
  visibility_wait_ms += o.visibility_wait_ms;
  compute_ms_saved += o.compute_ms_saved;
  peak_in_flight = std::max(peak_in_flight, o.peak_in_flight);
}

}  // namespace cirrus::mitigation
