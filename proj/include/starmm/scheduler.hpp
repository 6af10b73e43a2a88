// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <thread>
#include <utility>
#include <vector>

#include "starmm/error.hpp"

namespace starmm {

namespace detail {

struct TaskGroupState {
  std::atomic<std::size_t> pending{0};
  std::mutex error_mutex;
  std::exception_ptr error;

  void record(std::exception_ptr e) {
    std::lock_guard lock(error_mutex);
    if (!error) error = std::move(e);
  }
};

struct Task {
  void (*invoke)(void*) = nullptr;
  void* callable = nullptr;
  TaskGroupState* group = nullptr;
};

inline thread_local int tls_worker = -1;
inline thread_local const void* tls_scheduler = nullptr;

}  // namespace detail

// Fork-join work-stealing pool with p workers. The thread calling `run` acts
// as worker 0.
//
// Join policy: a worker blocked at a join only executes unstolen children of
// the group it waits on and otherwise idles; it never picks up unrelated work.
// The frames live on one worker therefore form a single ancestor chain, so a
// worker holds at most one task of any recursion depth, and at most one leaf.
// Idle workers steal the oldest task of a random victim.
class Scheduler {
 public:
  explicit Scheduler(unsigned workers) : queues_(workers == 0 ? 1 : workers) {
    require(workers >= 1, ErrorCode::InvalidConfig, "scheduler needs at least one worker");
    for (unsigned w = 1; w < workers; ++w) threads_.emplace_back([this, w] { worker_loop(w); });
  }

  ~Scheduler() {
    {
      std::lock_guard lock(state_mutex_);
      stop_.store(true);
    }
    state_cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  Scheduler(const Scheduler&) = delete;
  Scheduler& operator=(const Scheduler&) = delete;

  unsigned workers() const noexcept { return static_cast<unsigned>(queues_.size()); }

  // Worker index of the calling thread; 0 outside of any scheduler.
  static unsigned current_worker() noexcept {
    return detail::tls_worker < 0 ? 0u : static_cast<unsigned>(detail::tls_worker);
  }

  bool inside() const noexcept { return detail::tls_scheduler == this; }

  // Runs `root` to completion with all workers participating.
  template <class F>
  void run(F&& root) {
    require(detail::tls_worker < 0, ErrorCode::ContractViolation, "nested Scheduler::run");
    std::lock_guard run_lock(run_mutex_);
    detail::tls_worker = 0;
    detail::tls_scheduler = this;
    {
      std::lock_guard lock(state_mutex_);
      active_.store(true);
    }
    state_cv_.notify_all();
    std::exception_ptr error;
    try {
      root();
    } catch (...) {
      error = std::current_exception();
    }
    active_.store(false);
    detail::tls_worker = -1;
    detail::tls_scheduler = nullptr;
    if (error) std::rethrow_exception(error);
  }

  // Runs every callable, in parallel where workers are available, and returns
  // once all have finished. Outside of `run` the callables execute in order.
  template <class... F>
  void invoke(F&&... fs) {
    constexpr std::size_t n = sizeof...(F);
    if constexpr (n == 0) {
      return;
    } else {
      if (!inside()) {
        (fs(), ...);
        return;
      }
      detail::TaskGroupState group;
      detail::Task tasks[n] = {make_task(fs, group)...};
      fork_join(tasks, n, group);
    }
  }

  // Same as invoke for a runtime-sized batch.
  void invoke_all(std::vector<std::function<void()>>& fns) {
    if (fns.empty()) return;
    if (!inside()) {
      for (auto& f : fns) f();
      return;
    }
    detail::TaskGroupState group;
    std::vector<detail::Task> tasks;
    tasks.reserve(fns.size());
    for (auto& f : fns) tasks.push_back(make_task(f, group));
    fork_join(tasks.data(), tasks.size(), group);
  }

 private:
  struct alignas(64) Queue {
    std::mutex mutex;
    std::deque<detail::Task*> tasks;
  };

  template <class F>
  static detail::Task make_task(F& f, detail::TaskGroupState& group) {
    using Fn = std::remove_reference_t<F>;
    return detail::Task{[](void* p) { (*static_cast<Fn*>(p))(); }, const_cast<void*>(static_cast<const void*>(&f)),
                        &group};
  }

  static void execute(detail::Task* t) {
    try {
      t->invoke(t->callable);
    } catch (...) {
      t->group->record(std::current_exception());
    }
    t->group->pending.fetch_sub(1, std::memory_order_acq_rel);
  }

  void fork_join(detail::Task* tasks, std::size_t n, detail::TaskGroupState& group) {
    unsigned self = current_worker();
    group.pending.store(n, std::memory_order_relaxed);
    {
      // Reverse order so that the owner pops them first-to-last.
      std::lock_guard lock(queues_[self].mutex);
      for (std::size_t i = n; i-- > 1;) queues_[self].tasks.push_back(&tasks[i]);
    }
    execute(&tasks[0]);
    wait(group, self);
    if (group.error) std::rethrow_exception(group.error);
  }

  void wait(detail::TaskGroupState& group, unsigned self) {
    unsigned misses = 0;
    while (group.pending.load(std::memory_order_acquire) != 0) {
      detail::Task* t = nullptr;
      {
        auto& q = queues_[self];
        std::lock_guard lock(q.mutex);
        if (!q.tasks.empty() && q.tasks.back()->group == &group) {
          t = q.tasks.back();
          q.tasks.pop_back();
        }
      }
      if (t) {
        execute(t);
        misses = 0;
      } else {
        backoff(misses);
      }
    }
  }

  detail::Task* pop_own(unsigned self) {
    auto& q = queues_[self];
    std::lock_guard lock(q.mutex);
    if (q.tasks.empty()) return nullptr;
    detail::Task* t = q.tasks.back();
    q.tasks.pop_back();
    return t;
  }

  detail::Task* steal(unsigned self, std::minstd_rand& rng) {
    unsigned p = workers();
    if (p < 2) return nullptr;
    unsigned start = static_cast<unsigned>(rng() % p);
    for (unsigned k = 0; k < p; ++k) {
      unsigned victim = (start + k) % p;
      if (victim == self) continue;
      auto& q = queues_[victim];
      std::lock_guard lock(q.mutex);
      if (!q.tasks.empty()) {
        detail::Task* t = q.tasks.front();
        q.tasks.pop_front();
        return t;
      }
    }
    return nullptr;
  }

  static void backoff(unsigned& misses) {
    if (++misses < 64) {
      std::this_thread::yield();
    } else {
      std::this_thread::sleep_for(std::chrono::microseconds(20));
    }
  }

  void worker_loop(unsigned self) {
    detail::tls_worker = static_cast<int>(self);
    detail::tls_scheduler = this;
    std::minstd_rand rng(self * 7919u + 1u);
    unsigned misses = 0;
    for (;;) {
      if (stop_.load(std::memory_order_relaxed)) return;
      if (!active_.load(std::memory_order_relaxed)) {
        std::unique_lock lock(state_mutex_);
        state_cv_.wait(lock, [this] { return stop_.load() || active_.load(); });
        continue;
      }
      detail::Task* t = pop_own(self);
      if (!t) t = steal(self, rng);
      if (t) {
        execute(t);
        misses = 0;
      } else {
        backoff(misses);
      }
    }
  }

  std::vector<Queue> queues_;
  std::vector<std::thread> threads_;
  std::mutex run_mutex_;
  std::mutex state_mutex_;
  std::condition_variable state_cv_;
  std::atomic<bool> stop_{false};
  std::atomic<bool> active_{false};
};

}  // namespace starmm
