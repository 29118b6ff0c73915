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

#include "cirrus/mitigation/store_client.hpp"

#include <algorithm>

#include "cirrus/errors.hpp"
#include "cirrus/sim/sync.hpp"

namespace cirrus::mitigation {

store::ObjectKey secondary_key(const store::ObjectKey& key) { return store::ObjectKey(key.bucket, key.key + "#2"); }

// Holds one bandwidth share for the lifetime of a request.
struct StoreClient::InFlight {
  StoreClient& client;
  std::uint32_t share;

  explicit InFlight(StoreClient& c) : client(c), share(++c.in_flight_) {
    std::lock_guard lock(client.stats_mutex_);
    client.stats_.peak_in_flight = std::max(client.stats_.peak_in_flight, share);
  }
  ~InFlight() { --client.in_flight_; }
};

StoreClient::StoreClient(store::ObjectStore& store, MitigationSettings settings, store::RequestContext context)
    : store_(store), settings_(std::move(settings)), context_(std::move(context)) {
  settings_.validate();
}

store::GetResult StoreClient::get(const store::ObjectKey& key, store::ByteRange range) {
  InFlight slot(*this);
  auto& ex = store_.executor();
  auto first = store_.issue_get(key, range, context_, slot.share);
  {
    std::lock_guard lock(stats_mutex_);
    ++stats_.reads_total;
  }
  const auto done = first.completes_at();
  if (settings_.rsm) {
    double threshold = settings_.retry_factor * expected_response(settings_.read_model, first.bytes.size(), slot.share);
    auto hedge_at = first.issued_at + sim::from_ms(threshold);
    if (done > hedge_at) {
      ex.sleep_until(hedge_at);
      auto second = store_.issue_get(key, range, context_, slot.share, /*duplicate=*/true);
      auto winner_at = std::min(done, second.completes_at());
      ex.sleep_until(winner_at);
      {
        std::lock_guard lock(stats_mutex_);
        ++stats_.reads_hedged;
        stats_.compute_ms_saved += sim::to_ms(done - winner_at);
      }
      auto& w = second.completes_at() < done ? second : first;
      return store::GetResult{w.found, std::move(w.bytes), w.object_size, winner_at - first.issued_at};
    }
  }
  ex.sleep_until(done);
  return store::GetResult{first.found, std::move(first.bytes), first.object_size, first.timing.total()};
}

store::PutReceipt StoreClient::put(const store::ObjectKey& key, store::Payload payload) {
  InFlight slot(*this);
  auto& ex = store_.executor();
  const auto bytes = payload->size();
  auto first = store_.issue_put(key, payload, context_, slot.share);
  {
    std::lock_guard lock(stats_mutex_);
    ++stats_.writes_total;
  }
  const auto done = first.completes_at();
  if (settings_.wsm != WsmMode::kOff) {
    const double k = settings_.retry_factor;
    const auto& wm = settings_.write_model;
    const double pre = expected_response(wm.pre_send, bytes, slot.share);
    sim::SimTime hedge_at;
    if (settings_.wsm == WsmMode::kSingle) {
      // One timer over the whole request, so it must also allow for the
      // service time after the send.
      hedge_at = first.issued_at + sim::from_ms(k * (pre + wm.post_send.l_ms));
    } else {
      // The pre-send timer only runs while the payload is going out; once it
      // has been sent the clock restarts against the post-send model.
      hedge_at = first.issued_at + sim::from_ms(k * pre);
      if (first.send_done_at() <= hedge_at)
        hedge_at = first.send_done_at() + sim::from_ms(k * expected_response(wm.post_send, bytes, slot.share));
    }
    if (done > hedge_at) {
      ex.sleep_until(hedge_at);
      auto second = store_.issue_put(key, payload, context_, slot.share, /*duplicate=*/true);
      const bool second_wins = second.completes_at() < done;
      auto winner_at = second_wins ? second.completes_at() : done;
      ex.sleep_until(winner_at);
      {
        std::lock_guard lock(stats_mutex_);
        ++stats_.writes_hedged;
        stats_.compute_ms_saved += sim::to_ms(done - winner_at);
      }
      auto receipt = store_.complete_put(second_wins ? second : first, winner_at);
      receipt.duration = winner_at - first.issued_at;
      return receipt;
    }
  }
  ex.sleep_until(done);
  return store_.complete_put(first, done);
}

void StoreClient::write_object(const store::ObjectKey& key, store::Payload payload) {
  if (!settings_.doublewrite) {
    put(key, std::move(payload));
    return;
  }
  auto& ex = store_.executor();
  sim::WaitGroup group(ex);
  auto error = std::make_shared<std::exception_ptr>();
  auto error_mutex = std::make_shared<std::mutex>();
  sim::spawn_in_group(ex, group, error, error_mutex, [this, key, payload] { put(secondary_key(key), payload); });
  try {
    put(key, payload);
  } catch (...) {
    group.wait();
    throw;
  }
  group.wait();
  {
    std::lock_guard lock(stats_mutex_);
    ++stats_.doublewrite_puts;
  }
  if (*error) std::rethrow_exception(*error);
}

store::ObjectKey StoreClient::locate(const store::ObjectKey& key, store::ByteRange range, store::GetResult& out) {
  auto& ex = store_.executor();
  const auto start = ex.now();
  out = get(key, range);
  if (out.found) return key;

  std::vector<store::ObjectKey> candidates{key};
  if (settings_.doublewrite) {
    auto alt = secondary_key(key);
    out = get(alt, range);
    if (out.found) {
      std::lock_guard lock(stats_mutex_);
      ++stats_.doublewrite_fallbacks;
      stats_.visibility_wait_ms += sim::to_ms(ex.now() - start);
      return alt;
    }
    candidates.push_back(std::move(alt));
    std::lock_guard lock(stats_mutex_);
    ++stats_.both_invisible;
  }

  const auto give_up = start + sim::from_ms(settings_.poll_budget_ms);
  for (std::size_t attempt = 0;; ++attempt) {
    auto next = ex.now() + sim::from_ms(settings_.poll_interval_ms);
    if (next > give_up) break;
    ex.sleep_until(next);
    const auto& candidate = candidates[attempt % candidates.size()];
    out = get(candidate, range);
    {
      std::lock_guard lock(stats_mutex_);
      ++stats_.poll_gets;
      if (out.found) {
        if (candidate != key) ++stats_.doublewrite_fallbacks;
        stats_.visibility_wait_ms += sim::to_ms(ex.now() - start);
      }
    }
    if (out.found) return candidate;
  }
  if (settings_.doublewrite) throw BothInvisible("neither copy of " + key.str() + " became visible");
  throw NotVisible(key.str() + " did not become visible");
}

format::RangeRead ObjectReader::read(store::ByteRange range) {
  store::GetResult got;
  if (!resolved_) {
    resolved_ = client_.locate(key_, range, got);
  } else {
    got = client_.get(*resolved_, range);
    if (!got.found) throw NotVisible(resolved_->str() + " disappeared between reads");
  }
  return format::RangeRead{std::move(got.bytes), got.object_size};
}

void run_parallel(sim::Executor& executor, std::size_t jobs, std::uint32_t lanes,
                  const std::function<void(std::size_t)>& job) {
  if (jobs == 0) return;
  lanes = static_cast<std::uint32_t>(std::min<std::size_t>(std::max<std::uint32_t>(lanes, 1), jobs));
  if (lanes == 1) {
    for (std::size_t i = 0; i < jobs; ++i) job(i);
    return;
  }
  auto next = std::make_shared<std::atomic<std::size_t>>(0);
  sim::WaitGroup group(executor);
  auto error = std::make_shared<std::exception_ptr>();
  auto error_mutex = std::make_shared<std::mutex>();
  for (std::uint32_t lane = 0; lane < lanes; ++lane) {
    sim::spawn_in_group(executor, group, error, error_mutex, [&job, next, error, error_mutex, jobs] {
      auto failed = [&] {
        std::lock_guard lock(*error_mutex);
        return static_cast<bool>(*error);
      };
      for (std::size_t i = (*next)++; i < jobs && !failed(); i = (*next)++) job(i);
    });
  }
  group.wait();
  if (*error) std::rethrow_exception(*error);
}

}  // namespace cirrus::mitigation
