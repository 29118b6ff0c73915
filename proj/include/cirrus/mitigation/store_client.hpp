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

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "cirrus/format/range_reader.hpp"
#include "cirrus/mitigation/settings.hpp"
#include "cirrus/store/object_store.hpp"

namespace cirrus::mitigation {

/// Key holding the doublewrite copy of `key`.
store::ObjectKey secondary_key(const store::ObjectKey& key);

/// One invocation's view of the object store. Applies the mitigation
/// settings to every request and keeps per-invocation statistics.
///
/// Requests issued while others are outstanding share the invocation's
/// bandwidth: the number in flight (including the new one) is passed to the
/// store as the bandwidth share and used as c in the expected-time models.
class StoreClient {
 public:
  StoreClient(store::ObjectStore& store, MitigationSettings settings, store::RequestContext context);

  /// One GET, hedged once when RSM is on and it overruns k * r. Returns
  /// found=false when the object is absent or not yet visible.
  store::GetResult get(const store::ObjectKey& key, store::ByteRange range = store::ByteRange::all());

  /// One PUT (plus at most one hedge under WSM). Installs only the winner.
  store::PutReceipt put(const store::ObjectKey& key, store::Payload payload);

  /// Writes `payload` to `key` and, under doublewrite, concurrently to its
  /// secondary key, returning once both are acknowledged.
  void write_object(const store::ObjectKey& key, store::Payload payload);

  /// Finds a visible copy of `key` and reads `range` from it. Misses fall
  /// back to the secondary key (doublewrite) and then poll every
  /// poll_interval_ms. Throws BothInvisible (doublewrite) or NotVisible once
  /// poll_budget_ms is spent. Returns the key that answered.
  store::ObjectKey locate(const store::ObjectKey& key, store::ByteRange range, store::GetResult& out);

  const MitigationSettings& settings() const { return settings_; }
  const MitigationStats& stats() const { return stats_; }
  store::ObjectStore& store() { return store_; }
  const store::RequestContext& context() const { return context_; }

 private:
  struct InFlight;
  store::GetResult get_once(const store::ObjectKey& key, store::ByteRange range);

  store::ObjectStore& store_;
  MitigationSettings settings_;
  store::RequestContext context_;
  MitigationStats stats_;
  std::mutex stats_mutex_;
  std::atomic<std::uint32_t> in_flight_{0};
};

/// RangeReader over one object read through a StoreClient. The first read
/// locates a visible copy; later reads go to the same key.
class ObjectReader final : public format::RangeReader {
 public:
  ObjectReader(StoreClient& client, store::ObjectKey key) : client_(client), key_(std::move(key)) {}

  format::RangeRead read(store::ByteRange range) override;

 private:
  StoreClient& client_;
  store::ObjectKey key_;
  std::optional<store::ObjectKey> resolved_;
};

/// Runs job(i) for i in [0, jobs) on up to `lanes` concurrent processes and
/// returns once all finish, rethrowing the first failure.
void run_parallel(sim::Executor& executor, std::size_t jobs, std::uint32_t lanes,
                  const std::function<void(std::size_t)>& job);

}  // namespace cirrus::mitigation
