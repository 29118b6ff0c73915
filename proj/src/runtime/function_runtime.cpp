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

#include "cirrus/runtime/function_runtime.hpp"

#include <cmath>

#include "cirrus/errors.hpp"

namespace cirrus::runtime {

void RuntimeLimits::validate() const {
  if (max_concurrent == 0) throw ConfigError("max_concurrent must be positive");
  if (!(max_duration_ms > 0)) throw ConfigError("max_duration_ms must be positive");
  if (max_memory == 0) throw ConfigError("max_memory must be positive");
  if (!(billing_granularity_ms > 0)) throw ConfigError("billing_granularity_ms must be positive");
  if (!(startup_delay_ms >= 0)) throw ConfigError("startup_delay_ms must be non-negative");
}

void InvocationContext::reserve(std::uint64_t bytes, const std::string& what) {
  if (reserved_ + bytes > limits_.max_memory) {
    throw OutOfBudget(what + " needs " + std::to_string(bytes) + " bytes; " + std::to_string(reserved_) +
                      " of " + std::to_string(limits_.max_memory) + " already reserved");
  }
  reserved_ += bytes;
  peak_ = std::max(peak_, reserved_);
}

FunctionRuntime::FunctionRuntime(sim::Executor& executor, RuntimeLimits limits, store::CostLedger& ledger)
    : executor_(executor), limits_(limits), ledger_(ledger) {
  limits_.validate();
}

sim::SimDuration FunctionRuntime::billed_for(sim::SimDuration duration) const {
  const auto unit = sim::from_ms(limits_.billing_granularity_ms).count();
  const auto units = (duration.count() + unit - 1) / unit;
  return sim::SimDuration{units * unit};
}

void FunctionRuntime::invoke(InvocationRequest request) {
  if (!request.completions) throw std::invalid_argument("invocation needs a completion queue");
  {
    std::lock_guard lock(mutex_);
    queue_.push_back(std::move(request));
  }
  pump();
}

void FunctionRuntime::note_active_locked() { trace_.emplace_back(executor_.now(), active_); }

void FunctionRuntime::pump() {
  std::vector<InvocationRequest> admitted;
  sim::SimTime now = executor_.now();
  {
    std::lock_guard lock(mutex_);
    while (active_ < limits_.max_concurrent && !queue_.empty()) {
      admitted.push_back(std::move(queue_.front()));
      queue_.pop_front();
      ++active_;
      peak_ = std::max(peak_, active_);
      note_active_locked();
    }
  }
  for (auto& r : admitted) {
    executor_.spawn([this, r = std::move(r), now]() mutable { run_one(std::move(r), now); });
  }
}

void FunctionRuntime::run_one(InvocationRequest request, sim::SimTime admitted_at) {
  InvocationResult result;
  result.query_id = request.query_id;
  result.task = request.task;
  result.token = request.token;
  result.admitted_at = admitted_at;

  executor_.set_deadline(std::nullopt);
  executor_.sleep_for(sim::from_ms(limits_.startup_delay_ms));
  const auto start = executor_.now();
  executor_.set_deadline(start + sim::from_ms(limits_.max_duration_ms));
  InvocationContext ctx(executor_, limits_);
  try {
    request.body(ctx);
  } catch (const sim::DeadlineExceeded&) {
    result.status = store::InvocationStatus::kTimedOut;
    result.error = "exceeded max_duration of " + std::to_string(limits_.max_duration_ms) + " ms";
  } catch (const std::exception& e) {
    result.status = store::InvocationStatus::kFailed;
    result.error = e.what();
  } catch (...) {
    result.status = store::InvocationStatus::kFailed;
    result.error = "unknown error";
  }
  executor_.set_deadline(std::nullopt);
  result.finished_at = executor_.now();
  result.duration = result.finished_at - start;
  result.billed = billed_for(result.duration);
  result.peak_memory = ctx.peak_reserved();
  ledger_.record_invocation(
      store::InvocationRecord{result.query_id, result.task, result.status, result.duration, result.billed});
  {
    std::lock_guard lock(mutex_);
    --active_;
    note_active_locked();
  }
  auto* completions = request.completions;
  completions->send(std::move(result));
  pump();
}

std::uint32_t FunctionRuntime::active_count() const {
  std::lock_guard lock(mutex_);
  return active_;
}

std::uint32_t FunctionRuntime::peak_active() const {
  std::lock_guard lock(mutex_);
  return peak_;
}

std::size_t FunctionRuntime::queued_count() const {
  std::lock_guard lock(mutex_);
  return queue_.size();
}

std::vector<std::pair<sim::SimTime, std::uint32_t>> FunctionRuntime::active_trace() const {
  std::lock_guard lock(mutex_);
  return trace_;
}

}  // namespace cirrus::runtime
