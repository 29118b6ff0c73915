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
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "cirrus/sim/executor.hpp"
#include "cirrus/sim/sync.hpp"
#include "cirrus/store/ledger.hpp"

namespace cirrus::runtime {

struct RuntimeLimits {
  std::uint32_t max_concurrent = 1000;
  double max_duration_ms = 900000.0;
  std::uint64_t max_memory = 3ull << 30;
  double billing_granularity_ms = 1.0;
  /// Time between admission and the task body starting; holds a slot but is
  /// not billed.
  double startup_delay_ms = 50.0;

  void validate() const;
};

/// Handed to each running task. Memory is advisory: operators declare what
/// they intend to hold and the invocation fails when the total exceeds the
/// limit.
class InvocationContext {
 public:
  InvocationContext(sim::Executor& executor, const RuntimeLimits& limits) : executor_(executor), limits_(limits) {}

  /// Throws OutOfBudget.
  void reserve(std::uint64_t bytes, const std::string& what);
  void release(std::uint64_t bytes) { reserved_ -= std::min(bytes, reserved_); }
  std::uint64_t reserved() const { return reserved_; }
  std::uint64_t peak_reserved() const { return peak_; }

  sim::Executor& executor() { return executor_; }
  const RuntimeLimits& limits() const { return limits_; }

 private:
  sim::Executor& executor_;
  const RuntimeLimits& limits_;
  std::uint64_t reserved_ = 0;
  std::uint64_t peak_ = 0;
};

struct InvocationResult {
  std::string query_id;
  std::string task;
  /// Caller-chosen identifier echoed back, e.g. a stage/task/attempt index.
  std::uint64_t token = 0;
  store::InvocationStatus status = store::InvocationStatus::kOk;
  sim::SimDuration duration{};
  sim::SimDuration billed{};
  sim::SimTime admitted_at{};
  sim::SimTime finished_at{};
  std::uint64_t peak_memory = 0;
  std::string error;
};

using CompletionQueue = sim::Channel<InvocationResult>;

struct InvocationRequest {
  std::string query_id;
  std::string task;
  std::uint64_t token = 0;
  std::function<void(InvocationContext&)> body;
  CompletionQueue* completions = nullptr;
};

/// Simulated function service. Admits invocations FIFO under the concurrency
/// cap, enforces the duration limit, bills rounded-up execution time to the
/// ledger and posts every result to the request's completion queue.
class FunctionRuntime {
 public:
  FunctionRuntime(sim::Executor& executor, RuntimeLimits limits, store::CostLedger& ledger);

  void invoke(InvocationRequest request);

  std::uint32_t active_count() const;
  std::uint32_t peak_active() const;
  std::size_t queued_count() const;
  /// (time, active count) after every change.
  std::vector<std::pair<sim::SimTime, std::uint32_t>> active_trace() const;

  const RuntimeLimits& limits() const { return limits_; }
  sim::Executor& executor() { return executor_; }

  sim::SimDuration billed_for(sim::SimDuration duration) const;

 private:
  void pump();
  void run_one(InvocationRequest request, sim::SimTime admitted_at);
  void note_active_locked();

  sim::Executor& executor_;
  RuntimeLimits limits_;
  store::CostLedger& ledger_;

  mutable std::mutex mutex_;
  std::deque<InvocationRequest> queue_;
  std::uint32_t active_ = 0;
  std::uint32_t peak_ = 0;
  std::vector<std::pair<sim::SimTime, std::uint32_t>> trace_;
};

}  // namespace cirrus::runtime
