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

#include <cstddef>
#include <deque>
#include <exception>
#include <memory>
#include <mutex>
#include <utility>

#include "cirrus/sim/executor.hpp"

namespace cirrus::sim {

/// Unbounded multi-producer queue; receive() parks the calling process.
template <typename T>
class Channel {
 public:
  explicit Channel(Executor& executor) : notifier_(executor.make_notifier()) {}

  void send(T value) {
    std::lock_guard lock(mutex_);
    items_.push_back(std::move(value));
    notifier_->notify_all();
  }

  T receive() {
    std::unique_lock lock(mutex_);
    while (items_.empty()) notifier_->wait(lock);
    T value = std::move(items_.front());
    items_.pop_front();
    return value;
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return items_.size();
  }

 private:
  mutable std::mutex mutex_;
  std::deque<T> items_;
  std::unique_ptr<Notifier> notifier_;
};

/// Counts outstanding child processes and lets a parent wait for all of them.
class WaitGroup {
 public:
  explicit WaitGroup(Executor& executor) : notifier_(executor.make_notifier()) {}

  void add(std::size_t n = 1) {
    std::lock_guard lock(mutex_);
    pending_ += n;
  }

  void done() {
    std::lock_guard lock(mutex_);
    if (--pending_ == 0) notifier_->notify_all();
  }

  void wait() {
    std::unique_lock lock(mutex_);
    while (pending_ != 0) notifier_->wait(lock);
  }

 private:
  std::mutex mutex_;
  std::size_t pending_ = 0;
  std::unique_ptr<Notifier> notifier_;
};

/// Runs `body` in a child process and signals `group` when it exits, keeping
/// the first escaped exception in `error`.
template <typename Body>
void spawn_in_group(Executor& executor, WaitGroup& group, std::shared_ptr<std::exception_ptr> error,
                    std::shared_ptr<std::mutex> error_mutex, Body body) {
  group.add();
  executor.spawn([&group, error = std::move(error), error_mutex = std::move(error_mutex),
                  body = std::move(body)]() mutable {
    try {
      body();
    } catch (...) {
      std::lock_guard lock(*error_mutex);
      if (!*error) *error = std::current_exception();
    }
    group.done();
  });
}

}  // namespace cirrus::sim
