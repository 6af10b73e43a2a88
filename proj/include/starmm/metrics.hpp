// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <vector>

#include "starmm/error.hpp"
#include "starmm/pool.hpp"

namespace starmm {

// One temporary acquisition class: depth of the requesting task and block size.
struct AllocRecord {
  unsigned depth = 0;
  std::size_t elements = 0;
  std::uint64_t count = 0;
};

struct MetricsSnapshot {
  std::vector<std::int64_t> depth_max;  // max simultaneous tasks per depth
  std::int64_t base_max = 0;            // max simultaneous base-case tasks
  std::uint64_t base_tasks = 0;
  std::uint64_t tile_entries = 0;       // serialized entries through exclusion slots
  std::uint64_t pairs = 0;              // sibling pairs created by lazy allocation
  std::uint64_t pair_claims = 0;        // Empty -> FirstRunning
  std::uint64_t pair_completions = 0;   // FirstRunning -> FirstDone
  std::uint64_t lazy_temps = 0;         // halves that observed FirstRunning
  std::uint64_t scratch_acquires = 0;
  std::uint64_t scratch_releases = 0;
  std::vector<AllocRecord> alloc_log;
  PoolStats pool;

  std::uint64_t pair_transitions() const noexcept { return pair_claims + pair_completions; }
};

// Runtime counters. All updates are lock-free except the allocation log;
// snapshots are taken at quiescent points between runs.
class Metrics {
 public:
  static constexpr unsigned max_depth = 64;

  void task_enter(unsigned depth) {
    require(depth < max_depth, ErrorCode::InternalError, "task depth beyond gauge range");
    raise(depth_max_[depth], depth_cur_[depth].fetch_add(1, std::memory_order_relaxed) + 1);
  }

  void task_exit(unsigned depth) {
    require(depth < max_depth, ErrorCode::InternalError, "task depth beyond gauge range");
    if (depth_cur_[depth].fetch_sub(1, std::memory_order_relaxed) <= 0) {
      depth_cur_[depth].fetch_add(1, std::memory_order_relaxed);
      fail(ErrorCode::InternalError, "unbalanced task_exit");
    }
  }

  void base_enter() {
    base_tasks_.fetch_add(1, std::memory_order_relaxed);
    raise(base_max_, base_cur_.fetch_add(1, std::memory_order_relaxed) + 1);
  }

  void base_exit() {
    if (base_cur_.fetch_sub(1, std::memory_order_relaxed) <= 0) {
      base_cur_.fetch_add(1, std::memory_order_relaxed);
      fail(ErrorCode::InternalError, "unbalanced base_exit");
    }
  }

  void pair_created(std::uint64_t n = 1) { pairs_.fetch_add(n, std::memory_order_relaxed); }
  void pair_claimed() { claims_.fetch_add(1, std::memory_order_relaxed); }
  void pair_completed() { completions_.fetch_add(1, std::memory_order_relaxed); }
  void lazy_temp() { lazy_temps_.fetch_add(1, std::memory_order_relaxed); }
  void scratch_acquired(std::uint64_t n) { scratch_acq_.fetch_add(n, std::memory_order_relaxed); }
  void scratch_released(std::uint64_t n) { scratch_rel_.fetch_add(n, std::memory_order_relaxed); }
  void tile_entries(std::uint64_t n) { tile_entries_.fetch_add(n, std::memory_order_relaxed); }

  void log_alloc(unsigned depth, std::size_t elements) {
    std::lock_guard lock(log_mutex_);
    ++log_[{depth, elements}];
  }

  void begin_run() { running_.store(true); }
  void end_run() { running_.store(false); }
  bool running() const { return running_.load(); }

  MetricsSnapshot snapshot() const {
    MetricsSnapshot s;
    unsigned deepest = 0;
    for (unsigned d = 0; d < max_depth; ++d)
      if (depth_max_[d].load() > 0) deepest = d + 1;
    for (unsigned d = 0; d < deepest; ++d) s.depth_max.push_back(depth_max_[d].load());
    s.base_max = base_max_.load();
    s.base_tasks = base_tasks_.load();
    s.tile_entries = tile_entries_.load();
    s.pairs = pairs_.load();
    s.pair_claims = claims_.load();
    s.pair_completions = completions_.load();
    s.lazy_temps = lazy_temps_.load();
    s.scratch_acquires = scratch_acq_.load();
    s.scratch_releases = scratch_rel_.load();
    std::lock_guard lock(log_mutex_);
    for (const auto& [key, count] : log_) s.alloc_log.push_back({key.first, key.second, count});
    return s;
  }

  void reset() {
    require(!running(), ErrorCode::ContractViolation, "metrics reset during a run");
    for (unsigned d = 0; d < max_depth; ++d) {
      depth_cur_[d] = 0;
      depth_max_[d] = 0;
    }
    base_cur_ = 0;
    base_max_ = 0;
    base_tasks_ = 0;
    tile_entries_ = 0;
    pairs_ = 0;
    claims_ = 0;
    completions_ = 0;
    lazy_temps_ = 0;
    scratch_acq_ = 0;
    scratch_rel_ = 0;
    std::lock_guard lock(log_mutex_);
    log_.clear();
  }

 private:
  static void raise(std::atomic<std::int64_t>& max, std::int64_t value) {
    std::int64_t cur = max.load(std::memory_order_relaxed);
    while (value > cur && !max.compare_exchange_weak(cur, value, std::memory_order_relaxed)) {
    }
  }

  std::array<std::atomic<std::int64_t>, max_depth> depth_cur_{};
  std::array<std::atomic<std::int64_t>, max_depth> depth_max_{};
  std::atomic<std::int64_t> base_cur_{0};
  std::atomic<std::int64_t> base_max_{0};
  std::atomic<std::uint64_t> base_tasks_{0};
  std::atomic<std::uint64_t> tile_entries_{0};
  std::atomic<std::uint64_t> pairs_{0};
  std::atomic<std::uint64_t> claims_{0};
  std::atomic<std::uint64_t> completions_{0};
  std::atomic<std::uint64_t> lazy_temps_{0};
  std::atomic<std::uint64_t> scratch_acq_{0};
  std::atomic<std::uint64_t> scratch_rel_{0};
  std::atomic<bool> running_{false};
  mutable std::mutex log_mutex_;
  std::map<std::pair<unsigned, std::size_t>, std::uint64_t> log_;
};

class TaskScope {
 public:
  TaskScope(Metrics& m, unsigned depth) : m_(m), depth_(depth) { m_.task_enter(depth_); }
  ~TaskScope() { m_.task_exit(depth_); }
  TaskScope(const TaskScope&) = delete;
  TaskScope& operator=(const TaskScope&) = delete;

 private:
  Metrics& m_;
  unsigned depth_;
};

class BaseScope {
 public:
  explicit BaseScope(Metrics& m) : m_(m) { m_.base_enter(); }
  ~BaseScope() { m_.base_exit(); }
  BaseScope(const BaseScope&) = delete;
  BaseScope& operator=(const BaseScope&) = delete;

 private:
  Metrics& m_;
};

}  // namespace starmm
