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

#include "cirrus/store/object_store.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "cirrus/store/random.hpp"

namespace cirrus::store {
namespace {

constexpr std::uint64_t kGetSalt = 0x474554;
constexpr std::uint64_t kPutSalt = 0x505554;

std::uint64_t stream_base(std::uint64_t salt, const ObjectKey& key, const std::string& range,
                          const RequestContext& ctx) {
  std::uint64_t h = fnv1a(key.bucket, salt);
  h = fnv1a(key.key, h ^ 0x1f);
  h = fnv1a(range, h ^ 0x2f);
  h = fnv1a(ctx.query_id, h ^ 0x3f);
  return fnv1a(ctx.requester, h ^ 0x4f);
}

}  // namespace

ByteRange ByteRange::span(std::uint64_t begin, std::uint64_t end) {
  if (end < begin) throw std::invalid_argument("byte range end precedes begin");
  return ByteRange(Kind::kSpan, begin, end);
}

std::pair<std::uint64_t, std::uint64_t> ByteRange::resolve(std::uint64_t size) const {
  switch (kind_) {
    case Kind::kAll:
      return {0, size};
    case Kind::kSpan:
      return {std::min(a_, size), std::min(b_, size)};
    case Kind::kSuffix:
      return {size - std::min(a_, size), size};
  }
  return {0, 0};
}

std::optional<std::uint64_t> ByteRange::requested_length() const {
  switch (kind_) {
    case Kind::kAll:
      return std::nullopt;
    case Kind::kSpan:
      return b_ - a_;
    case Kind::kSuffix:
      return a_;
  }
  return std::nullopt;
}

std::string ByteRange::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case Kind::kAll:
      out << "all";
      break;
    case Kind::kSpan:
      out << a_ << "-" << b_;
      break;
    case Kind::kSuffix:
      out << "-" << a_;
      break;
  }
  return out.str();
}

ObjectStore::ObjectStore(sim::Executor& executor, StoreProfile profile, CostLedger& ledger)
    : executor_(executor), profile_(std::move(profile)), ledger_(ledger) {
  profile_.get.validate();
  profile_.put.validate();
}

std::uint64_t ObjectStore::next_stream(std::uint64_t base) {
  std::lock_guard lock(mutex_);
  std::uint64_t occurrence = occurrences_[base]++;
  return hash_combine(base, occurrence);
}

PendingGet ObjectStore::issue_get(const ObjectKey& key, ByteRange range, const RequestContext& ctx, double share,
                                  bool duplicate) {
  key.validate();
  PendingGet pending;
  pending.issued_at = executor_.now();
  {
    std::lock_guard lock(mutex_);
    auto it = objects_.find(key);
    if (it != objects_.end()) {
      // Newest version already visible at issue time; never a mix of two writes.
      const Version* chosen = nullptr;
      for (const auto& v : it->second) {
        if (v.visible_after <= pending.issued_at && (chosen == nullptr || v.created_at >= chosen->created_at))
          chosen = &v;
      }
      if (chosen != nullptr) {
        pending.found = true;
        pending.object_size = chosen->payload->size();
        auto [b, e] = range.resolve(pending.object_size);
        pending.bytes.assign(chosen->payload->begin() + static_cast<std::ptrdiff_t>(b),
                             chosen->payload->begin() + static_cast<std::ptrdiff_t>(e));
      }
    }
  }
  std::uint64_t stream = next_stream(stream_base(kGetSalt, key, range.describe(), ctx));
  pending.timing = sample_request_timing(profile_.get, pending.bytes.size(), stream, share);
  ledger_.record_request(RequestRecord{RequestKind::kGet, key, pending.bytes.size(), pending.issued_at,
                                       pending.completes_at(), duplicate, pending.found, ctx.query_id,
                                       ctx.requester});
  return pending;
}

GetResult ObjectStore::get(const ObjectKey& key, ByteRange range, const RequestContext& ctx) {
  PendingGet pending = issue_get(key, range, ctx);
  executor_.sleep_until(pending.completes_at());
  return GetResult{pending.found, std::move(pending.bytes), pending.object_size, pending.timing.total()};
}

PendingPut ObjectStore::issue_put(const ObjectKey& key, Payload payload, const RequestContext& ctx, double share,
                                  bool duplicate) {
  key.validate();
  if (!payload) throw std::invalid_argument("put requires a payload");
  PendingPut pending;
  pending.key = key;
  pending.issued_at = executor_.now();
  std::uint64_t stream = next_stream(stream_base(kPutSalt, key, "", ctx));
  pending.timing = sample_request_timing(profile_.put, payload->size(), stream, share);
  pending.visibility_delay_ms = sample_visibility_delay(profile_.put, stream);
  pending.payload = std::move(payload);
  ledger_.record_request(RequestRecord{RequestKind::kPut, key, pending.payload->size(), pending.issued_at,
                                       pending.completes_at(), duplicate, true, ctx.query_id, ctx.requester});
  return pending;
}

PutReceipt ObjectStore::complete_put(const PendingPut& pending, sim::SimTime completed_at) {
  Version v{pending.payload, completed_at, completed_at + sim::from_ms(pending.visibility_delay_ms)};
  install(pending.key, v, completed_at);
  return PutReceipt{completed_at - pending.issued_at, completed_at, v.visible_after};
}

PutReceipt ObjectStore::put(const ObjectKey& key, Payload payload, const RequestContext& ctx) {
  PendingPut pending = issue_put(key, std::move(payload), ctx);
  executor_.sleep_until(pending.completes_at());
  return complete_put(pending, pending.completes_at());
}

void ObjectStore::install(const ObjectKey& key, Version version, sim::SimTime now) {
  std::int64_t delta = 0;
  {
    std::lock_guard lock(mutex_);
    auto& versions = objects_[key];
    std::int64_t previous = versions.empty() ? 0 : static_cast<std::int64_t>(versions.back().payload->size());
    delta = static_cast<std::int64_t>(version.payload->size()) - previous;
    versions.push_back(std::move(version));
    // Keep the newest version visible at `now` and anything newer.
    std::size_t keep_from = 0;
    for (std::size_t i = 0; i < versions.size(); ++i) {
      if (versions[i].visible_after <= now) keep_from = i;
    }
    if (keep_from > 0) versions.erase(versions.begin(), versions.begin() + static_cast<std::ptrdiff_t>(keep_from));
  }
  ledger_.record_stored_bytes(delta);
}

void ObjectStore::preload(const ObjectKey& key, Payload payload) {
  key.validate();
  auto now = executor_.now();
  install(key, Version{std::move(payload), now, now}, now);
}

std::optional<Payload> ObjectStore::peek(const ObjectKey& key) const {
  std::lock_guard lock(mutex_);
  auto it = objects_.find(key);
  if (it == objects_.end() || it->second.empty()) return std::nullopt;
  return it->second.back().payload;
}

std::vector<ObjectKey> ObjectStore::list(std::string_view prefix, std::string_view bucket) const {
  std::lock_guard lock(mutex_);
  std::vector<ObjectKey> out;
  for (const auto& [key, versions] : objects_) {
    if (key.bucket == bucket && key.key.starts_with(prefix)) out.push_back(key);
  }
  return out;
}

}  // namespace cirrus::store
