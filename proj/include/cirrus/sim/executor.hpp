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

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

#include "cirrus/sim/clock.hpp"

namespace cirrus::sim {

/// Raised inside a process whose sleep would cross its deadline. The process
/// has been advanced to the deadline when this is thrown.
class DeadlineExceeded : public std::runtime_error {
 public:
  DeadlineExceeded() : std::runtime_error("deadline exceeded") {}
};

/// Parks a process until another process notifies. Mirrors the shape of a
/// condition variable: the caller holds `lock`, which is released while parked.
class Notifier {
 public:
  virtual ~Notifier() = default;
  virtual void wait(std::unique_lock<std::mutex>& lock) = 0;
  virtual void notify_all() = 0;
};

/// Runs simulated processes (worker tasks, read lanes, the coordinator loop)
/// against a shared clock.
///
/// Two implementations exist. The virtual executor runs every process as a
/// fiber on the calling thread and advances time only when all processes are
/// parked, so a run is a deterministic discrete-event simulation. The scaled
/// executor runs each process on an OS thread and maps simulated time onto the
/// wall clock by a constant factor.
///
/// Code running inside a process must never hold a mutex across sleep_until()
/// or Notifier::wait() other than the lock passed to wait().
class Executor {
 public:
  virtual ~Executor() = default;

  virtual SimTime now() const = 0;

  /// Suspends the calling process until `t`. Throws DeadlineExceeded when the
  /// process deadline falls before `t`.
  virtual void sleep_until(SimTime t) = 0;
  void sleep_for(SimDuration d) { sleep_until(now() + d); }

  /// Starts a new process. It inherits the deadline of the spawning process.
  virtual void spawn(std::function<void()> body) = 0;

  /// Runs `root` as a process and returns once every process has finished.
  /// Rethrows the first exception that escaped any process.
  virtual void run(std::function<void()> root) = 0;

  virtual std::unique_ptr<Notifier> make_notifier() = 0;

  virtual void set_deadline(std::optional<SimTime> deadline) = 0;
  virtual std::optional<SimTime> deadline() const = 0;

  virtual bool deterministic() const = 0;
};

std::unique_ptr<Executor> make_virtual_executor(std::size_t stack_bytes = 256 * 1024);

/// `real_seconds_per_sim_second` of 0.001 runs a simulated second in 1ms.
std::unique_ptr<Executor> make_scaled_executor(double real_seconds_per_sim_second);

}  // namespace cirrus::sim
