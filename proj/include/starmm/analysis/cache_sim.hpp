// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "starmm/config.hpp"
#include "starmm/error.hpp"
#include "starmm/trace.hpp"

namespace starmm::analysis {

enum class CachePolicy { Lru };

// Fully associative LRU cache of M elements in lines of B elements. Counts
// line transfers into the cache (misses); write-backs are not counted.
class LruCache {
 public:
  LruCache(std::uint64_t M, std::uint64_t B) : shift_(log2_exact(B)), capacity_(M / B) {
    require(is_pow2(M) && is_pow2(B), ErrorCode::InvalidConfig, "cache and line size must be powers of two");
    require(M >= B * B, ErrorCode::InvalidConfig, "cache must be tall (M >= B^2)");
    prev_.resize(capacity_);
    next_.resize(capacity_);
    line_of_.resize(capacity_);
  }

  void access(std::uint64_t address) {
    std::uint64_t line = address >> shift_;
    if (line == last_line_) return;  // already most recent
    last_line_ = line;
    if (line >= slot_of_.size()) slot_of_.resize(std::max<std::size_t>(line + 1, slot_of_.size() * 2), npos);
    std::uint32_t slot = slot_of_[line];
    if (slot != npos) {
      move_to_front(slot);
      return;
    }
    ++misses_;
    if (used_ < capacity_) {
      slot = static_cast<std::uint32_t>(used_++);
    } else {
      slot = tail_;
      unlink(slot);
      slot_of_[line_of_[slot]] = npos;
    }
    line_of_[slot] = line;
    slot_of_[line] = slot;
    push_front(slot);
  }

  std::uint64_t misses() const noexcept { return misses_; }

 private:
  static constexpr std::uint32_t npos = 0xffffffffu;

  void unlink(std::uint32_t s) {
    if (prev_[s] != npos) next_[prev_[s]] = next_[s];
    else head_ = next_[s];
    if (next_[s] != npos) prev_[next_[s]] = prev_[s];
    else tail_ = prev_[s];
  }

  void push_front(std::uint32_t s) {
    prev_[s] = npos;
    next_[s] = head_;
    if (head_ != npos) prev_[head_] = s;
    head_ = s;
    if (tail_ == npos) tail_ = s;
  }

  void move_to_front(std::uint32_t s) {
    if (head_ == s) return;
    unlink(s);
    push_front(s);
  }

  unsigned shift_;
  std::size_t capacity_;
  std::size_t used_ = 0;
  std::uint32_t head_ = npos, tail_ = npos;
  std::vector<std::uint32_t> prev_, next_;
  std::vector<std::uint64_t> line_of_;
  std::vector<std::uint32_t> slot_of_;
  std::uint64_t last_line_ = ~std::uint64_t{0};
  std::uint64_t misses_ = 0;
};

inline std::uint64_t simulate_cache(const AccessTrace& trace, std::uint64_t M, std::uint64_t B,
                                    CachePolicy = CachePolicy::Lru) {
  LruCache cache(M, B);
  for (const auto& a : trace) cache.access(a.address);
  return cache.misses();
}

// Feeds a live execution into several caches at once, so large traces never
// have to be stored.
class CacheSink final : public TraceSink {
 public:
  CacheSink(const std::vector<std::uint64_t>& sizes, std::uint64_t B) {
    for (auto M : sizes) caches_.emplace_back(M, B);
  }

  void on_access(std::uint64_t address, AccessKind) override {
    ++accesses_;
    for (auto& c : caches_) c.access(address);
  }

  std::vector<std::uint64_t> misses() const {
    std::vector<std::uint64_t> out;
    for (const auto& c : caches_) out.push_back(c.misses());
    return out;
  }

  std::uint64_t accesses() const noexcept { return accesses_; }

 private:
  std::vector<LruCache> caches_;
  std::uint64_t accesses_ = 0;
};

}  // namespace starmm::analysis
