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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cirrus/sim/executor.hpp"
#include "cirrus/store/latency.hpp"
#include "cirrus/store/ledger.hpp"
#include "cirrus/store/object_key.hpp"

namespace cirrus::store {

using Bytes = std::vector<std::uint8_t>;
using Payload = std::shared_ptr<const Bytes>;

inline Payload make_payload(Bytes bytes) { return std::make_shared<const Bytes>(std::move(bytes)); }

/// Whole object, [begin, end), or the last `n` bytes. Ranges past the end of
/// the object are clamped, as object stores do.
class ByteRange {
 public:
  static ByteRange all() { return ByteRange(Kind::kAll, 0, 0); }
  static ByteRange span(std::uint64_t begin, std::uint64_t end);
  static ByteRange suffix(std::uint64_t length) { return ByteRange(Kind::kSuffix, length, 0); }

  /// Absolute [begin, end) against an object of `size` bytes.
  std::pair<std::uint64_t, std::uint64_t> resolve(std::uint64_t size) const;

  /// Requested length when the range is bounded independently of object size.
  std::optional<std::uint64_t> requested_length() const;

  std::string describe() const;
  bool operator==(const ByteRange&) const = default;

 private:
  enum class Kind { kAll, kSpan, kSuffix };
  ByteRange(Kind kind, std::uint64_t a, std::uint64_t b) : kind_(kind), a_(a), b_(b) {}
  Kind kind_;
  std::uint64_t a_;
  std::uint64_t b_;
};

/// Who is asking. Requests are attributed to queries in the ledger, and the
/// requester identity keys the latency stream so the same logical request
/// draws the same latency in paired runs.
struct RequestContext {
  std::string query_id;
  std::string requester;
};

struct GetResult {
  bool found = false;
  Bytes bytes;
  std::uint64_t object_size = 0;
  sim::SimDuration duration{};
};

struct PendingGet {
  bool found = false;
  Bytes bytes;
  std::uint64_t object_size = 0;
  RequestTiming timing;
  sim::SimTime issued_at{};

  sim::SimTime completes_at() const { return issued_at + timing.total(); }
};

struct PendingPut {
  ObjectKey key;
  Payload payload;
  RequestTiming timing;
  double visibility_delay_ms = 0.0;
  sim::SimTime issued_at{};

  sim::SimTime send_done_at() const { return issued_at + sim::from_ms(timing.transfer_ms); }
  sim::SimTime completes_at() const { return issued_at + timing.total(); }
};

struct PutReceipt {
  sim::SimDuration duration{};
  sim::SimTime completed_at{};
  sim::SimTime visible_at{};
};

/// Simulated object store: write-once objects replaced atomically, range
/// reads, per-request metering and sampled latency and visibility delays.
///
/// Blocking calls (get/put) suspend the calling process for the sampled
/// duration. The split-phase calls (issue_get/issue_put/complete_put) let the
/// caller overlap and race requests, which is how hedging is built.
class ObjectStore {
 public:
  ObjectStore(sim::Executor& executor, StoreProfile profile, CostLedger& ledger);

  PutReceipt put(const ObjectKey& key, Payload payload, const RequestContext& ctx = {});
  GetResult get(const ObjectKey& key, ByteRange range = ByteRange::all(), const RequestContext& ctx = {});

  /// Meters one GET now and snapshots the visible object. Does not sleep.
  PendingGet issue_get(const ObjectKey& key, ByteRange range, const RequestContext& ctx, double share = 1.0,
                       bool duplicate = false);
  /// Meters one PUT now and samples its timing and visibility delay. The
  /// object is installed only by complete_put().
  PendingPut issue_put(const ObjectKey& key, Payload payload, const RequestContext& ctx, double share = 1.0,
                       bool duplicate = false);
  PutReceipt complete_put(const PendingPut& pending, sim::SimTime completed_at);

  /// Unmetered bulk load: visible immediately. Used for base tables.
  void preload(const ObjectKey& key, Payload payload);
  /// Unmetered read of the newest version, ignoring visibility.
  std::optional<Payload> peek(const ObjectKey& key) const;
  /// Unmetered listing of keys (in the default bucket) starting with `prefix`.
  std::vector<ObjectKey> list(std::string_view prefix, std::string_view bucket = kDefaultBucket) const;

  const StoreProfile& profile() const { return profile_; }
  sim::Executor& executor() { return executor_; }
  CostLedger& ledger() { return ledger_; }

 private:
  struct Version {
    Payload payload;
    sim::SimTime created_at{};
    sim::SimTime visible_after{};
  };

  std::uint64_t next_stream(std::uint64_t base);
  void install(const ObjectKey& key, Version version, sim::SimTime now);

  sim::Executor& executor_;
  StoreProfile profile_;
  CostLedger& ledger_;

  mutable std::mutex mutex_;
  std::map<ObjectKey, std::vector<Version>> objects_;
  std::unordered_map<std::uint64_t, std::uint64_t> occurrences_;
};

}  // namespace cirrus::store
