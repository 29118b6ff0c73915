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

#include <boost/context/fiber.hpp>
#include <boost/context/protected_fixedsize_stack.hpp>

#include <cassert>
#include <cstdint>
#include <exception>
#include <memory>
#include <queue>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cirrus/sim/executor.hpp"

namespace ctx = boost::context;

namespace cirrus::sim {
namespace {

class VirtualExecutor;

struct Process {
  ctx::fiber context;
  ctx::fiber scheduler;
  std::function<void()> body;
  std::optional<SimTime> deadline;
  bool finished = false;
};

struct Wakeup {
  SimTime at;
  std::uint64_t seq;
  Process* process;
  bool operator>(const Wakeup& other) const { return at != other.at ? at > other.at : seq > other.seq; }
};

class VirtualNotifier final : public Notifier {
 public:
  explicit VirtualNotifier(VirtualExecutor& executor) : executor_(executor) {}
  void wait(std::unique_lock<std::mutex>& lock) override;
  void notify_all() override;

 private:
  VirtualExecutor& executor_;
  std::vector<Process*> waiters_;
};

class VirtualExecutor final : public Executor {
 public:
  explicit VirtualExecutor(std::size_t stack_bytes) : stack_bytes_(stack_bytes) {}

  ~VirtualExecutor() override {
    // Processes still parked after a deadlocked run are leaked on purpose:
    // destroying a suspended fiber would unwind through user catch blocks.
    for (auto& [raw, owned] : processes_) {
      if (!owned->finished) (void)owned.release();
    }
  }

  SimTime now() const override { return now_; }

  void sleep_until(SimTime t) override {
    Process* self = current_;
    if (self == nullptr) throw std::logic_error("sleep_until called outside a simulated process");
    bool expired = false;
    if (self->deadline && t > *self->deadline) {
      t = *self->deadline;
      expired = true;
    }
    if (t < now_) t = now_;
    if (queue_.empty() || queue_.top().at > t) {
      // No other process can run before t.
      now_ = t;
    } else {
      schedule(self, t);
      suspend();
    }
    if (expired) throw DeadlineExceeded();
  }

  void spawn(std::function<void()> body) override {
    auto owned = std::make_unique<Process>();
    Process* p = owned.get();
    p->body = std::move(body);
    p->deadline = current_ != nullptr ? current_->deadline : std::nullopt;
    p->context = ctx::fiber(std::allocator_arg, ctx::protected_fixedsize_stack(stack_bytes_),
                            [this, p](ctx::fiber&& scheduler) {
                              p->scheduler = std::move(scheduler);
                              try {
                                p->body();
                              } catch (const ctx::detail::forced_unwind&) {
                                throw;
                              } catch (...) {
                                if (!failure_) failure_ = std::current_exception();
                              }
                              p->body = nullptr;
                              p->finished = true;
                              return std::move(p->scheduler);
                            });
    processes_.emplace(p, std::move(owned));
    schedule(p, now_);
  }

  void run(std::function<void()> root) override {
    if (running_) throw std::logic_error("executor already running");
    running_ = true;
    failure_ = nullptr;
    spawn(std::move(root));
    while (!queue_.empty()) {
      Wakeup next = queue_.top();
      queue_.pop();
      now_ = next.at;
      current_ = next.process;
      next.process->context = std::move(next.process->context).resume();
      current_ = nullptr;
      if (next.process->finished) processes_.erase(next.process);
    }
    running_ = false;
    if (!processes_.empty()) {
      auto stuck = processes_.size();
      for (auto& [raw, owned] : processes_) (void)owned.release();
      processes_.clear();
      throw std::logic_error("simulation deadlock: " + std::to_string(stuck) + " processes parked forever");
    }
    if (failure_) {
      auto failure = failure_;
      failure_ = nullptr;
      std::rethrow_exception(failure);
    }
  }

  std::unique_ptr<Notifier> make_notifier() override { return std::make_unique<VirtualNotifier>(*this); }

  void set_deadline(std::optional<SimTime> deadline) override {
    if (current_ == nullptr) throw std::logic_error("set_deadline called outside a simulated process");
    current_->deadline = deadline;
  }

  std::optional<SimTime> deadline() const override {
    return current_ != nullptr ? current_->deadline : std::nullopt;
  }

  bool deterministic() const override { return true; }

  Process* current() const { return current_; }

  void schedule(Process* p, SimTime at) { queue_.push(Wakeup{at, seq_++, p}); }

  void suspend() {
    Process* self = current_;
    assert(self != nullptr);
    self->scheduler = std::move(self->scheduler).resume();
  }

 private:
  std::size_t stack_bytes_;
  SimTime now_ = kEpoch;
  std::uint64_t seq_ = 0;
  Process* current_ = nullptr;
  bool running_ = false;
  std::priority_queue<Wakeup, std::vector<Wakeup>, std::greater<>> queue_;
  std::unordered_map<Process*, std::unique_ptr<Process>> processes_;
  std::exception_ptr failure_;
};

void VirtualNotifier::wait(std::unique_lock<std::mutex>& lock) {
  Process* self = executor_.current();
  if (self == nullptr) throw std::logic_error("Notifier::wait called outside a simulated process");
  waiters_.push_back(self);
  lock.unlock();
  executor_.suspend();
  lock.lock();
}

void VirtualNotifier::notify_all() {
  for (Process* p : waiters_) executor_.schedule(p, executor_.now());
  waiters_.clear();
}

}  // namespace

std::unique_ptr<Executor> make_virtual_executor(std::size_t stack_bytes) {
  return std::make_unique<VirtualExecutor>(stack_bytes);
}

}  // namespace cirrus::sim
