// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <new>
#include <unordered_map>
#include <vector>

#include "starmm/error.hpp"

namespace starmm {

// Plain element storage; the payload type used when a pool only hands out memory.
template <class T>
struct Buffer {
  static constexpr std::size_t element_bytes = sizeof(T);
  explicit Buffer(std::size_t elements) : data(std::make_unique_for_overwrite<T[]>(elements)) {}
  std::unique_ptr<T[]> data;
};

// Test hook: anything other than Lifo breaks the reuse contract on purpose.
enum class ReusePolicy { Lifo, Fifo, Never };

struct PoolStats {
  std::uint64_t allocated_bytes = 0;   // bytes obtained from the system and still held
  std::uint64_t issued_bytes = 0;
  std::uint64_t high_water_bytes = 0;
  std::uint64_t fresh_allocations = 0;
  std::uint64_t reuses = 0;
  std::uint64_t releases = 0;
  std::uint64_t requested_elements = 0;  // cumulative over all acquisitions
  std::vector<std::uint64_t> worker_high_water_bytes;

  std::uint64_t acquisitions() const noexcept { return fresh_allocations + reuses; }
};

// Per-worker pool of exact-size blocks. A worker that releases a block and
// later asks for the same size gets that very block back, most recent first.
// Each worker touches only its own stacks; the counters are atomic.
template <class Payload>
class BlockPool {
  struct Block {
    Block(std::size_t sz, unsigned w, std::uint64_t i, bool r) : payload(sz), size(sz), owner(w), id(i), raw(r) {}
    Payload payload;
    std::size_t size;
    unsigned owner;
    std::uint64_t id;
    bool raw;
    std::atomic<bool> issued{false};
  };

 public:
  static constexpr std::size_t element_bytes = Payload::element_bytes;

  class Handle {
   public:
    Handle() = default;
    std::uint64_t id() const { return block_->id; }
    std::size_t size() const { return block_->size; }
    unsigned owner() const { return block_->owner; }
    bool fresh() const { return fresh_; }
    Payload& payload() const { return block_->payload; }
    explicit operator bool() const { return block_ != nullptr; }
    friend bool operator==(const Handle& a, const Handle& b) { return a.block_ == b.block_; }

   private:
    friend class BlockPool;
    Handle(Block* b, bool fresh) : block_(b), fresh_(fresh) {}
    Block* block_ = nullptr;
    bool fresh_ = false;
  };

  explicit BlockPool(unsigned workers) : shards_(workers) {
    require(workers >= 1, ErrorCode::InvalidConfig, "pool needs at least one worker");
  }

  unsigned workers() const noexcept { return static_cast<unsigned>(shards_.size()); }

  void set_policy(ReusePolicy policy) noexcept { policy_ = policy; }
  ReusePolicy policy() const noexcept { return policy_; }

  // Pops the most recently released block of this (worker, size), else
  // allocates. Reused contents are left as they were.
  Handle acquire(unsigned worker, std::size_t size) { return acquire_impl(worker, size, false); }

  // Always a fresh block, returned to the system on release (raw allocation).
  Handle acquire_unpooled(unsigned worker, std::size_t size) { return acquire_impl(worker, size, true); }

  void release(const Handle& h, unsigned worker) {
    require(static_cast<bool>(h), ErrorCode::ContractViolation, "release of an empty handle");
    Block* b = h.block_;
    require(b->owner == worker, ErrorCode::ContractViolation, "block released by a worker that does not own it");
    bool was_issued = b->issued.exchange(false, std::memory_order_acq_rel);
    require(was_issued, ErrorCode::ContractViolation, "block released twice");
    auto& shard = shards_[worker];
    std::uint64_t bytes = b->size * element_bytes;
    issued_.fetch_sub(bytes, std::memory_order_relaxed);
    shard.issued.fetch_sub(bytes, std::memory_order_relaxed);
    releases_.fetch_add(1, std::memory_order_relaxed);
    if (b->raw) {
      allocated_.fetch_sub(bytes, std::memory_order_relaxed);
      shard.drop(b);
      return;
    }
    shard.stacks[b->size].push_back(b);
  }

  PoolStats stats() const {
    PoolStats s;
    s.allocated_bytes = allocated_.load();
    s.issued_bytes = issued_.load();
    s.high_water_bytes = high_water_.load();
    s.fresh_allocations = fresh_.load();
    s.reuses = reuses_.load();
    s.releases = releases_.load();
    s.requested_elements = requested_.load();
    for (const auto& shard : shards_) s.worker_high_water_bytes.push_back(shard.high_water.load());
    return s;
  }

  std::uint64_t high_water() const noexcept { return high_water_.load(); }

  // Frees every pooled block and zeroes the counters. Nothing may be issued.
  void reset() {
    require(issued_.load() == 0, ErrorCode::ContractViolation, "pool reset while blocks are issued");
    for (auto& shard : shards_) {
      shard.stacks.clear();
      shard.owned.clear();
      shard.issued = 0;
      shard.high_water = 0;
    }
    allocated_ = 0;
    high_water_ = 0;
    fresh_ = 0;
    reuses_ = 0;
    releases_ = 0;
    requested_ = 0;
  }

 private:
  struct alignas(64) Shard {
    std::unordered_map<std::size_t, std::deque<Block*>> stacks;
    std::vector<std::unique_ptr<Block>> owned;
    std::atomic<std::uint64_t> issued{0};
    std::atomic<std::uint64_t> high_water{0};

    void drop(Block* b) {
      for (auto it = owned.begin(); it != owned.end(); ++it)
        if (it->get() == b) {
          *it = std::move(owned.back());
          owned.pop_back();
          return;
        }
    }
  };

  static void raise_max(std::atomic<std::uint64_t>& max, std::uint64_t value) {
    std::uint64_t cur = max.load(std::memory_order_relaxed);
    while (value > cur && !max.compare_exchange_weak(cur, value, std::memory_order_relaxed)) {
    }
  }

  Handle acquire_impl(unsigned worker, std::size_t size, bool raw) {
    require(size > 0, ErrorCode::ContractViolation, "zero-size block request");
    require(worker < workers(), ErrorCode::ContractViolation, "worker index out of range");
    auto& shard = shards_[worker];
    Block* b = nullptr;
    bool fresh = false;
    if (!raw && policy_ != ReusePolicy::Never) {
      auto it = shard.stacks.find(size);
      if (it != shard.stacks.end() && !it->second.empty()) {
        if (policy_ == ReusePolicy::Lifo) {
          b = it->second.back();
          it->second.pop_back();
        } else {
          b = it->second.front();
          it->second.pop_front();
        }
      }
    }
    std::uint64_t bytes = size * element_bytes;
    if (!b) {
      try {
        shard.owned.push_back(std::make_unique<Block>(size, worker, next_id_.fetch_add(1), raw));
      } catch (const std::bad_alloc&) {
        fail(ErrorCode::AllocFailure, "out of memory allocating a temporary block");
      }
      b = shard.owned.back().get();
      fresh = true;
      fresh_.fetch_add(1, std::memory_order_relaxed);
      allocated_.fetch_add(bytes, std::memory_order_relaxed);
    } else {
      reuses_.fetch_add(1, std::memory_order_relaxed);
    }
    b->issued.store(true, std::memory_order_release);
    requested_.fetch_add(size, std::memory_order_relaxed);
    raise_max(high_water_, issued_.fetch_add(bytes, std::memory_order_relaxed) + bytes);
    raise_max(shard.high_water, shard.issued.fetch_add(bytes, std::memory_order_relaxed) + bytes);
    return Handle(b, fresh);
  }

  std::vector<Shard> shards_;
  ReusePolicy policy_ = ReusePolicy::Lifo;
  std::atomic<std::uint64_t> next_id_{0};
  std::atomic<std::uint64_t> allocated_{0};
  std::atomic<std::uint64_t> issued_{0};
  std::atomic<std::uint64_t> high_water_{0};
  std::atomic<std::uint64_t> fresh_{0};
  std::atomic<std::uint64_t> reuses_{0};
  std::atomic<std::uint64_t> releases_{0};
  std::atomic<std::uint64_t> requested_{0};
};

}  // namespace starmm
