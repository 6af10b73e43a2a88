// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <thread>

#include "starmm/error.hpp"

namespace starmm {

// One exclusion slot per aligned tile x tile block of an output buffer.
// Writers that may overlap (serialized-write recursion, lazily allocated
// temporaries merging back) enter the slot of every tile they touch.
class TileExclusionTable {
 public:
  TileExclusionTable() = default;

  TileExclusionTable(std::size_t rows, std::size_t cols, std::size_t tile) { reshape(rows, cols, tile); }

  // Keeps the allocation when the shape is unchanged; counters are reset.
  void reshape(std::size_t rows, std::size_t cols, std::size_t tile) {
    require(tile > 0 && rows % tile == 0 && cols % tile == 0, ErrorCode::AlignmentError,
            "buffer extent is not a multiple of the tile size");
    std::size_t count = (rows / tile) * (cols / tile);
    if (count != count_) slots_ = std::make_unique<Slot[]>(count);
    tile_ = tile;
    tiles_per_row_ = cols / tile;
    count_ = count;
    reset_counters();
  }

  std::size_t tile() const noexcept { return tile_; }
  std::size_t slot_count() const noexcept { return count_; }

  std::size_t slot_index(std::size_t row, std::size_t col) const {
    require(row % tile_ == 0 && col % tile_ == 0, ErrorCode::AlignmentError, "region is not tile aligned");
    std::size_t idx = (row / tile_) * tiles_per_row_ + col / tile_;
    require(idx < count_, ErrorCode::AlignmentError, "tile outside of table");
    return idx;
  }

  void lock(std::size_t slot) noexcept {
    auto& flag = slots_[slot].busy;
    for (;;) {
      if (!flag.exchange(true, std::memory_order_acquire)) break;
      while (flag.load(std::memory_order_relaxed)) std::this_thread::yield();
    }
    slots_[slot].entries.fetch_add(1, std::memory_order_relaxed);
  }

  void unlock(std::size_t slot) noexcept { slots_[slot].busy.store(false, std::memory_order_release); }

  std::uint64_t entries(std::size_t slot) const noexcept {
    return slots_[slot].entries.load(std::memory_order_relaxed);
  }

  std::uint64_t total_entries() const noexcept {
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < count_; ++i) sum += entries(i);
    return sum;
  }

  void reset_counters() noexcept {
    for (std::size_t i = 0; i < count_; ++i) slots_[i].entries.store(0, std::memory_order_relaxed);
  }

 private:
  struct alignas(64) Slot {
    std::atomic<bool> busy{false};
    std::atomic<std::uint64_t> entries{0};
  };

  std::unique_ptr<Slot[]> slots_;
  std::size_t tile_ = 0;
  std::size_t tiles_per_row_ = 0;
  std::size_t count_ = 0;
};

class SlotGuard {
 public:
  SlotGuard(TileExclusionTable& table, std::size_t slot) : table_(table), slot_(slot) { table_.lock(slot_); }
  ~SlotGuard() { table_.unlock(slot_); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  TileExclusionTable& table_;
  std::size_t slot_;
};

}  // namespace starmm
