// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "starmm/config.hpp"
#include "starmm/error.hpp"
#include "starmm/kernels.hpp"
#include "starmm/matrix.hpp"
#include "starmm/runtime.hpp"
#include "starmm/semiring.hpp"
#include "starmm/tile_table.hpp"

namespace starmm {

// C <- C (+) scale (x) P, entering the exclusion slot of each covered tile of
// C in turn. Concurrent callers on the same tile serialize; different tiles
// proceed in parallel. Returns the number of slot entries made.
template <Semiring S>
std::size_t atomic_accumulate(const MatrixRegion<typename S::value_type>& c,
                              const MatrixRegion<typename S::value_type>& p, TileExclusionTable& table,
                              typename S::value_type scale = S::one(), TraceSink* trace = nullptr) {
  check_same_square(c, p);
  const std::size_t t = table.tile();
  require(c.rows % t == 0 && c.row0 % t == 0 && c.col0 % t == 0, ErrorCode::AlignmentError,
          "accumulation target is not tile aligned");
  std::size_t entries = 0;
  for (std::size_t ti = 0; ti < c.rows; ti += t)
    for (std::size_t tj = 0; tj < c.cols; tj += t) {
      MatrixRegion<typename S::value_type> ct = c, pt = p;
      ct.row0 += ti;
      ct.col0 += tj;
      pt.row0 += ti;
      pt.col0 += tj;
      ct.rows = ct.cols = pt.rows = pt.cols = t;
      SlotGuard guard(table, table.slot_index(ct.row0, ct.col0));
      kernel::add_scaled<S>(ct, pt, scale, trace);
      ++entries;
    }
  return entries;
}

// Same, routed through the table attached to C and counted in the metrics.
template <Semiring S>
void atomic_accumulate(Runtime<typename S::value_type>& rt, const MatrixRegion<typename S::value_type>& c,
                       const MatrixRegion<typename S::value_type>& p, typename S::value_type scale = S::one()) {
  require(c.slots != nullptr, ErrorCode::InternalError, "accumulation target has no exclusion table");
  rt.metrics().tile_entries(atomic_accumulate<S>(c, p, *c.slots, scale, rt.trace()));
}

// Base kernel whose write into C may race with accumulations into the same
// tile: the kernel runs inside C's exclusion slot.
template <Semiring S>
void locked_base(Runtime<typename S::value_type>& rt, const MatrixRegion<typename S::value_type>& c,
                 const MatrixRegion<typename S::value_type>& a, const MatrixRegion<typename S::value_type>& b,
                 kernel::Mode mode) {
  BaseScope scope(rt.metrics());
  if (c.slots == nullptr) {
    kernel::base<S>(c, a, b, rt.base(), mode, rt.trace());
    return;
  }
  SlotGuard guard(*c.slots, c.slots->slot_index(c.row0, c.col0));
  rt.metrics().tile_entries(1);
  kernel::base<S>(c, a, b, rt.base(), mode, rt.trace());
}

template <Semiring S>
void plain_base(Runtime<typename S::value_type>& rt, const MatrixRegion<typename S::value_type>& c,
                const MatrixRegion<typename S::value_type>& a, const MatrixRegion<typename S::value_type>& b,
                kernel::Mode mode) {
  BaseScope scope(rt.metrics());
  kernel::base<S>(c, a, b, rt.base(), mode, rt.trace());
}

// C <- C (+) D by 2-way divide and conquer, the four quadrant pairs in
// parallel, serial below the base dimension.
template <Semiring S>
void madd(Runtime<typename S::value_type>& rt, const MatrixRegion<typename S::value_type>& c,
          const MatrixRegion<typename S::value_type>& d) {
  check_same_square(c, d);
  if (c.rows <= rt.base() || c.rows % 2 != 0) {
    kernel::add_scaled<S>(c, d, S::one(), rt.trace());
    return;
  }
  rt.invoke([&] { madd<S>(rt, quadrant(c, 0, 0), quadrant(d, 0, 0)); },
            [&] { madd<S>(rt, quadrant(c, 0, 1), quadrant(d, 0, 1)); },
            [&] { madd<S>(rt, quadrant(c, 1, 0), quadrant(d, 1, 0)); },
            [&] { madd<S>(rt, quadrant(c, 1, 1), quadrant(d, 1, 1)); });
}

// Entry-point precondition shared by all schedules: equal square power-of-two
// operands no smaller than the base dimension.
template <class T>
void validate_operands(const Config& cfg, const MatrixRegion<T>& c, const MatrixRegion<T>& a,
                       const MatrixRegion<T>& b) {
  require(c.square() && a.square() && b.square(), ErrorCode::DimMismatch, "operands must be square");
  require(c.rows == a.rows && a.rows == b.rows, ErrorCode::DimMismatch, "operand dimensions differ");
  require(is_pow2(c.rows), ErrorCode::InvalidSplit, "dimension must be a power of two");
  require(c.rows >= cfg.base, ErrorCode::InvalidSplit, "dimension smaller than the base dimension");
}

// Runs `body` inside the runtime's scheduler, entering it if needed.
template <class T, class F>
void run_in(Runtime<T>& rt, F&& body) {
  if (rt.scheduler().inside()) body();
  else rt.run(std::forward<F>(body));
}

}  // namespace starmm
