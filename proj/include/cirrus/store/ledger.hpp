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
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cirrus/sim/clock.hpp"
#include "cirrus/store/object_key.hpp"
#include "cirrus/store/pricing.hpp"

namespace cirrus::store {

enum class RequestKind { kGet, kPut };

struct RequestRecord {
  RequestKind kind = RequestKind::kGet;
  ObjectKey key;
  std::uint64_t bytes = 0;
  sim::SimTime issued_at{};
  sim::SimTime completed_at{};
  bool was_duplicate = false;
  bool found = true;  // GETs only: false when the object was absent or not yet visible
  std::string query_id;
  std::string requester;
};

enum class InvocationStatus { kOk, kFailed, kTimedOut };

struct InvocationRecord {
  std::string query_id;
  std::string task;
  InvocationStatus status = InvocationStatus::kOk;
  sim::SimDuration duration{};
  sim::SimDuration billed{};
};

struct CostSummary {
  std::uint64_t gets = 0;
  std::uint64_t puts = 0;
  std::uint64_t duplicate_gets = 0;
  std::uint64_t duplicate_puts = 0;
  std::uint64_t missed_gets = 0;
  std::uint64_t invocations = 0;
  sim::SimDuration billed{};
  sim::SimDuration invocation_time{};
  std::uint64_t peak_bytes_stored = 0;
  double get_dollars = 0.0;
  double put_dollars = 0.0;
  double storage_dollars = 0.0;
  double invocation_dollars = 0.0;

  double total_dollars() const { return get_dollars + put_dollars + storage_dollars + invocation_dollars; }
};

/// Exact tally of metered requests and billed invocation time.
///
/// Every request and invocation is kept as a raw record so any summary can be
/// recomputed independently. Storage is reported as the peak byte count only;
/// its dollar component stays zero because queries last seconds, not months.
class CostLedger {
 public:
  explicit CostLedger(PriceSheet prices = {}) : prices_(prices) {}

  void record_request(RequestRecord record);
  void record_invocation(InvocationRecord record);
  void record_stored_bytes(std::int64_t delta);

  /// Totals over every record, or only those tagged with `query_id`.
  CostSummary summary(std::optional<std::string_view> query_id = std::nullopt) const;

  std::vector<RequestRecord> requests(std::optional<std::string_view> query_id = std::nullopt) const;
  std::vector<InvocationRecord> invocations(std::optional<std::string_view> query_id = std::nullopt) const;
  std::uint64_t request_count() const;

  const PriceSheet& prices() const { return prices_; }

  static double dollars(std::uint64_t requests, double unit_price) { return static_cast<double>(requests) * unit_price; }
  static double billed_dollars(sim::SimDuration billed, double price_per_ms) { return sim::to_ms(billed) * price_per_ms; }

 private:
  PriceSheet prices_;
  mutable std::mutex mutex_;
  std::vector<RequestRecord> requests_;
  std::vector<InvocationRecord> invocations_;
  std::int64_t stored_bytes_ = 0;
  std::int64_t peak_bytes_ = 0;
};

}  // namespace cirrus::store
