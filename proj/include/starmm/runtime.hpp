// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <utility>

#include "starmm/config.hpp"
#include "starmm/matrix.hpp"
#include "starmm/metrics.hpp"
#include "starmm/pool.hpp"
#include "starmm/scheduler.hpp"
#include "starmm/tile_table.hpp"
#include "starmm/trace.hpp"

namespace starmm {

// Storage behind a pooled temporary: the elements plus the exclusion table for
// writers racing inside it. Both survive reuse.
template <class T>
struct TempStorage {
  static constexpr std::size_t element_bytes = sizeof(T);
  explicit TempStorage(std::size_t elements) : data(std::make_unique_for_overwrite<T[]>(elements)) {}

  std::unique_ptr<T[]> data;
  TileExclusionTable slots;
  const TraceSink* traced_by = nullptr;
  std::uint64_t trace_base = 0;
};

enum class AllocMode { Pooled, Raw };

// Everything an execution needs: the worker pool, the per-worker block pool,
// counters, and an optional trace sink (serial runs only).
template <class T>
class Runtime {
 public:
  using Pool = BlockPool<TempStorage<T>>;

  explicit Runtime(const Config& cfg) : cfg_(cfg), scheduler_(cfg.workers), pool_(cfg.workers) { cfg_.validate(); }

  const Config& config() const noexcept { return cfg_; }
  std::size_t base() const noexcept { return cfg_.base; }
  unsigned workers() const noexcept { return cfg_.workers; }
  Scheduler& scheduler() noexcept { return scheduler_; }
  Pool& pool() noexcept { return pool_; }
  Metrics& metrics() noexcept { return metrics_; }

  TraceSink* trace() const noexcept { return trace_; }
  void set_trace(TraceSink* sink) {
    require(sink == nullptr || cfg_.workers == 1, ErrorCode::ContractViolation, "tracing requires a serial runtime");
    trace_ = sink;
  }

  template <class F>
  void run(F&& f) {
    metrics_.begin_run();
    try {
      scheduler_.run(std::forward<F>(f));
    } catch (...) {
      metrics_.end_run();
      throw;
    }
    metrics_.end_run();
  }

  template <class... F>
  void invoke(F&&... fs) {
    scheduler_.invoke(std::forward<F>(fs)...);
  }

  unsigned worker() const noexcept { return Scheduler::current_worker(); }

  MetricsSnapshot snapshot() const {
    MetricsSnapshot s = metrics_.snapshot();
    s.pool = pool_.stats();
    return s;
  }

  // Drains the pool and zeroes all counters between runs.
  void reset() {
    metrics_.reset();
    pool_.reset();
  }

  // A dim x dim temporary held by the current worker until destroyed.
  class Temp {
   public:
    Temp(Runtime& rt, std::size_t dim, unsigned depth, AllocMode mode) : rt_(&rt), worker_(rt.worker()) {
      std::size_t elements = dim * dim;
      handle_ = mode == AllocMode::Pooled ? rt.pool_.acquire(worker_, elements)
                                          : rt.pool_.acquire_unpooled(worker_, elements);
      auto& st = handle_.payload();
      if (st.slots.slot_count() != (dim / rt.base()) * (dim / rt.base()) || st.slots.tile() != rt.base())
        st.slots.reshape(dim, dim, rt.base());
      if (rt.trace_ && st.traced_by != rt.trace_) {
        st.trace_base = rt.trace_->reserve(elements);
        st.traced_by = rt.trace_;
      }
      region_ = make_region(st.data.get(), dim, dim, &st.slots, st.trace_base);
      rt.metrics_.log_alloc(depth, elements);
    }

    ~Temp() {
      if (rt_) rt_->pool_.release(handle_, worker_);
    }

    Temp(const Temp&) = delete;
    Temp& operator=(const Temp&) = delete;

    const MatrixRegion<T>& region() const noexcept { return region_; }
    bool fresh() const noexcept { return handle_.fresh(); }

   private:
    Runtime* rt_;
    unsigned worker_;
    typename Pool::Handle handle_;
    MatrixRegion<T> region_;
  };

 private:
  Config cfg_;
  Scheduler scheduler_;
  Pool pool_;
  Metrics metrics_;
  TraceSink* trace_ = nullptr;
};

}  // namespace starmm
