// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>

#include "starmm/error.hpp"

namespace starmm {

constexpr bool is_pow2(std::size_t x) { return x != 0 && std::has_single_bit(x); }

constexpr unsigned log2_exact(std::size_t x) { return static_cast<unsigned>(std::countr_zero(x)); }

// Machine and recursion parameters shared by execution and analysis.
struct Config {
  std::size_t base = 32;         // b: base-case dimension
  unsigned workers = 1;          // p
  std::size_t cache = 1 << 15;   // M, in elements
  std::size_t line = 8;          // B, in elements
  double epsilon = 1.0 / 3.0;

  void validate() const {
    require(is_pow2(base), ErrorCode::InvalidConfig, "base dimension must be a power of two");
    require(workers >= 1, ErrorCode::InvalidConfig, "worker count must be at least 1");
    require(is_pow2(line), ErrorCode::InvalidConfig, "line size must be a power of two");
    require(is_pow2(cache), ErrorCode::InvalidConfig, "cache size must be a power of two");
    require(cache >= line * line, ErrorCode::InvalidConfig, "cache must be tall (M >= B^2)");
    require(epsilon > 0.0 && epsilon <= 1.0, ErrorCode::InvalidConfig, "epsilon must lie in (0, 1]");
  }
};

// Depth at which the hybrid schedules switch from the 8-way serialized-write
// recursion to the lazily allocating one: ceil(log2(p) / 2).
constexpr unsigned switch_depth(unsigned workers) {
  unsigned bits = 0;
  while ((std::size_t{1} << bits) < workers) ++bits;  // ceil(log2 p)
  return (bits + 1) / 2;
}

static_assert(switch_depth(1) == 0);
static_assert(switch_depth(4) == 1);
static_assert(switch_depth(16) == 2);
static_assert(switch_depth(8) == 2);

}  // namespace starmm
