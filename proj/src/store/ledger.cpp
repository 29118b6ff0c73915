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

#include "cirrus/store/ledger.hpp"

#include <algorithm>
#include <stdexcept>

namespace cirrus::store {

void PriceSheet::validate() const {
  if (get_price < 0 || put_price < 0 || storage_price_gb_month < 0 || invocation_price_per_ms < 0)
    throw std::invalid_argument("prices must be non-negative");
}

void CostLedger::record_request(RequestRecord record) {
  std::lock_guard lock(mutex_);
  requests_.push_back(std::move(record));
}

void CostLedger::record_invocation(InvocationRecord record) {
  std::lock_guard lock(mutex_);
  invocations_.push_back(std::move(record));
}

void CostLedger::record_stored_bytes(std::int64_t delta) {
  std::lock_guard lock(mutex_);
  stored_bytes_ += delta;
  peak_bytes_ = std::max(peak_bytes_, stored_bytes_);
}

CostSummary CostLedger::summary(std::optional<std::string_view> query_id) const {
  std::lock_guard lock(mutex_);
  CostSummary s;
  for (const auto& r : requests_) {
    if (query_id && r.query_id != *query_id) continue;
    if (r.kind == RequestKind::kGet) {
      ++s.gets;
      if (r.was_duplicate) ++s.duplicate_gets;
      if (!r.found) ++s.missed_gets;
    } else {
      ++s.puts;
      if (r.was_duplicate) ++s.duplicate_puts;
    }
  }
  for (const auto& inv : invocations_) {
    if (query_id && inv.query_id != *query_id) continue;
    ++s.invocations;
    s.billed += inv.billed;
    s.invocation_time += inv.duration;
  }
  s.peak_bytes_stored = static_cast<std::uint64_t>(peak_bytes_);
  s.get_dollars = dollars(s.gets, prices_.get_price);
  s.put_dollars = dollars(s.puts, prices_.put_price);
  s.storage_dollars = 0.0;
  s.invocation_dollars = billed_dollars(s.billed, prices_.invocation_price_per_ms);
  return s;
}

std::vector<RequestRecord> CostLedger::requests(std::optional<std::string_view> query_id) const {
  std::lock_guard lock(mutex_);
  if (!query_id) return requests_;
  std::vector<RequestRecord> out;
  std::copy_if(requests_.begin(), requests_.end(), std::back_inserter(out),
               [&](const RequestRecord& r) { return r.query_id == *query_id; });
  return out;
}

std::vector<InvocationRecord> CostLedger::invocations(std::optional<std::string_view> query_id) const {
  std::lock_guard lock(mutex_);
  if (!query_id) return invocations_;
  std::vector<InvocationRecord> out;
  std::copy_if(invocations_.begin(), invocations_.end(), std::back_inserter(out),
               [&](const InvocationRecord& r) { return r.query_id == *query_id; });
  return out;
}

std::uint64_t CostLedger::request_count() const {
  std::lock_guard lock(mutex_);
  return requests_.size();
}

}  // namespace cirrus::store
