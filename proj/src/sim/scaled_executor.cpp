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

#include <chrono>
#include <condition_variable>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>

#include "cirrus/sim/executor.hpp"

namespace cirrus::sim {
namespace {

thread_local std::optional<SimTime> t_deadline;
thread_local bool t_in_process = false;

class ThreadNotifier final : public Notifier {
 public:
  void wait(std::unique_lock<std::mutex>& lock) override { cv_.wait(lock); }
  void notify_all() override { cv_.notify_all(); }

 private:
  std::condition_variable cv_;
};

class ScaledExecutor final : public Executor {
 public:
  explicit ScaledExecutor(double scale) : scale_(scale), origin_(std::chrono::steady_clock::now()) {
    if (!(scale > 0.0)) throw std::invalid_argument("clock scale must be positive");
  }

  SimTime now() const override {
    auto real = std::chrono::steady_clock::now() - origin_;
    auto sim_us = std::chrono::duration<double, std::micro>(real).count() / scale_;
    return SimTime{SimDuration{static_cast<std::int64_t>(sim_us)}};
  }

  void sleep_until(SimTime t) override {
    bool expired = false;
    if (t_deadline && t > *t_deadline) {
      t = *t_deadline;
      expired = true;
    }
    auto real_offset = std::chrono::duration<double, std::micro>(t.time_since_epoch().count() * scale_);
    std::this_thread::sleep_until(origin_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(real_offset));
    if (expired) throw DeadlineExceeded();
  }

  void spawn(std::function<void()> body) override {
    {
      std::lock_guard lock(mutex_);
      ++live_;
    }
    std::optional<SimTime> inherited = t_in_process ? t_deadline : std::nullopt;
    std::thread([this, inherited, body = std::move(body)]() mutable {
      t_in_process = true;
      t_deadline = inherited;
      try {
        body();
      } catch (...) {
        std::lock_guard lock(mutex_);
        if (!failure_) failure_ = std::current_exception();
      }
      body = nullptr;
      std::lock_guard lock(mutex_);
      if (--live_ == 0) idle_.notify_all();
    }).detach();
  }

  void run(std::function<void()> root) override {
    spawn(std::move(root));
    std::unique_lock lock(mutex_);
    idle_.wait(lock, [this] { return live_ == 0; });
    if (failure_) {
      auto failure = failure_;
      failure_ = nullptr;
      std::rethrow_exception(failure);
    }
  }

  std::unique_ptr<Notifier> make_notifier() override { return std::make_unique<ThreadNotifier>(); }

  void set_deadline(std::optional<SimTime> deadline) override { t_deadline = deadline; }
  std::optional<SimTime> deadline() const override { return t_deadline; }

  bool deterministic() const override { return false; }

 private:
  double scale_;
  std::chrono::steady_clock::time_point origin_;
  std::mutex mutex_;
  std::condition_variable idle_;
  std::size_t live_ = 0;
  std::exception_ptr failure_;
};

}  // namespace

std::unique_ptr<Executor> make_scaled_executor(double real_seconds_per_sim_second) {
  return std::make_unique<ScaledExecutor>(real_seconds_per_sim_second);
}

}  // namespace cirrus::sim
