// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstddef>
#include <memory>

#include "starmm/config.hpp"
#include "starmm/kernels.hpp"
#include "starmm/matrix.hpp"
#include "starmm/metrics.hpp"
#include "starmm/ops.hpp"
#include "starmm/runtime.hpp"
#include "starmm/semiring.hpp"
#include "starmm/tile_table.hpp"

// Classical (8-product) schedules. Every entry point computes C <- C + A*B.
namespace starmm {

// Sibling-pair protocol for lazy allocation.
enum class PairState : int { Empty, FirstRunning, FirstDone };

namespace detail {

template <Semiring S>
class Classic {
 public:
  using T = typename S::value_type;
  using Region = MatrixRegion<T>;

  explicit Classic(Runtime<T>& rt) : rt_(rt), b_(rt.base()) {}

  void co2(const Region& c, const Region& a, const Region& b, unsigned d, kernel::Mode mode) {
    TaskScope scope(rt_.metrics(), d);
    if (c.rows == b_) {
      plain_base<S>(rt_, c, a, b, mode);
      return;
    }
    auto q = split(c, a, b);
    rt_.invoke([&] { co2(q.c[0][0], q.a[0][0], q.b[0][0], d + 1, mode); },
               [&] { co2(q.c[0][1], q.a[0][0], q.b[0][1], d + 1, mode); },
               [&] { co2(q.c[1][0], q.a[1][0], q.b[0][0], d + 1, mode); },
               [&] { co2(q.c[1][1], q.a[1][0], q.b[0][1], d + 1, mode); });
    constexpr auto acc = kernel::Mode::Accumulate;
    rt_.invoke([&] { co2(q.c[0][0], q.a[0][1], q.b[1][0], d + 1, acc); },
               [&] { co2(q.c[0][1], q.a[0][1], q.b[1][1], d + 1, acc); },
               [&] { co2(q.c[1][0], q.a[1][1], q.b[1][0], d + 1, acc); },
               [&] { co2(q.c[1][1], q.a[1][1], q.b[1][1], d + 1, acc); });
  }

  // `mode` Overwrite means C holds garbage on entry (a freshly acquired D).
  void co3(const Region& c, const Region& a, const Region& b, unsigned d, kernel::Mode mode, AllocMode alloc) {
    TaskScope scope(rt_.metrics(), d);
    if (c.rows == b_) {
      plain_base<S>(rt_, c, a, b, mode);
      return;
    }
    typename Runtime<T>::Temp temp(rt_, c.rows, d, alloc);
    const Region& dr = temp.region();
    auto q = split(c, a, b);
    Region dq[2][2] = {{quadrant(dr, 0, 0), quadrant(dr, 0, 1)}, {quadrant(dr, 1, 0), quadrant(dr, 1, 1)}};
    constexpr auto ow = kernel::Mode::Overwrite;
    rt_.invoke([&] { co3(q.c[0][0], q.a[0][0], q.b[0][0], d + 1, mode, alloc); },
               [&] { co3(q.c[0][1], q.a[0][0], q.b[0][1], d + 1, mode, alloc); },
               [&] { co3(q.c[1][0], q.a[1][0], q.b[0][0], d + 1, mode, alloc); },
               [&] { co3(q.c[1][1], q.a[1][0], q.b[0][1], d + 1, mode, alloc); },
               [&] { co3(dq[0][0], q.a[0][1], q.b[1][0], d + 1, ow, alloc); },
               [&] { co3(dq[0][1], q.a[0][1], q.b[1][1], d + 1, ow, alloc); },
               [&] { co3(dq[1][0], q.a[1][1], q.b[1][0], d + 1, ow, alloc); },
               [&] { co3(dq[1][1], q.a[1][1], q.b[1][1], d + 1, ow, alloc); });
    madd<S>(rt_, c, dr);
  }

  // Base case of the serialized-write recursion: private b x b product, then
  // a tile-exclusive merge into C.
  void tar_leaf(const Region& c, const Region& a, const Region& b, unsigned d) {
    typename Runtime<T>::Temp temp(rt_, b_, d, AllocMode::Pooled);
    plain_base<S>(rt_, temp.region(), a, b, kernel::Mode::Overwrite);
    atomic_accumulate<S>(rt_, c, temp.region());
  }

  void tar(const Region& c, const Region& a, const Region& b, unsigned d) {
    TaskScope scope(rt_.metrics(), d);
    if (c.rows == b_) {
      tar_leaf(c, a, b, d);
      return;
    }
    spawn8(c, a, b, [this, d](const Region& ci, const Region& ai, const Region& bi) { tar(ci, ai, bi, d + 1); });
  }

  void sar(const Region& c, const Region& a, const Region& b, unsigned d) {
    TaskScope scope(rt_.metrics(), d);
    if (c.rows == b_) {
      locked_base<S>(rt_, c, a, b, kernel::Mode::Accumulate);
      return;
    }
    std::atomic<PairState> pairs[2][2] = {{PairState::Empty, PairState::Empty}, {PairState::Empty, PairState::Empty}};
    rt_.metrics().pair_created(4);
    auto q = split(c, a, b);
    auto half = [&, d](unsigned i, unsigned j, unsigned k) { sar_half(q.c[i][j], q.a[i][k], q.b[k][j], pairs[i][j], d + 1); };
    rt_.invoke([&] { half(0, 0, 0); }, [&] { half(0, 1, 0); }, [&] { half(1, 0, 0); }, [&] { half(1, 1, 0); },
               [&] { half(0, 0, 1); }, [&] { half(0, 1, 1); }, [&] { half(1, 0, 1); }, [&] { half(1, 1, 1); });
  }

  void star(const Region& c, const Region& a, const Region& b, unsigned d, unsigned k) {
    if (d >= k) {
      sar(c, a, b, d);
      return;
    }
    TaskScope scope(rt_.metrics(), d);
    if (c.rows == b_) {
      tar_leaf(c, a, b, d);
      return;
    }
    spawn8(c, a, b,
           [this, d, k](const Region& ci, const Region& ai, const Region& bi) { star(ci, ai, bi, d + 1, k); });
  }

 private:
  struct Quads {
    Region c[2][2], a[2][2], b[2][2];
  };

  static Quads split(const Region& c, const Region& a, const Region& b) {
    Quads q;
    for (unsigned i = 0; i < 2; ++i)
      for (unsigned j = 0; j < 2; ++j) {
        q.c[i][j] = quadrant(c, i, j);
        q.a[i][j] = quadrant(a, i, j);
        q.b[i][j] = quadrant(b, i, j);
      }
    return q;
  }

  // All eight products at once; the two targeting one quadrant share it.
  template <class F>
  void spawn8(const Region& c, const Region& a, const Region& b, F&& f) {
    auto q = split(c, a, b);
    auto go = [&](unsigned i, unsigned j, unsigned k) { f(q.c[i][j], q.a[i][k], q.b[k][j]); };
    rt_.invoke([&] { go(0, 0, 0); }, [&] { go(0, 1, 0); }, [&] { go(1, 0, 0); }, [&] { go(1, 1, 0); },
               [&] { go(0, 0, 1); }, [&] { go(0, 1, 1); }, [&] { go(1, 0, 1); }, [&] { go(1, 1, 1); });
  }

  void sar_half(const Region& c, const Region& a, const Region& b, std::atomic<PairState>& pair, unsigned d) {
    PairState seen = PairState::Empty;
    if (pair.compare_exchange_strong(seen, PairState::FirstRunning, std::memory_order_acq_rel)) {
      rt_.metrics().pair_claimed();
      sar(c, a, b, d);
      pair.store(PairState::FirstDone, std::memory_order_release);
      rt_.metrics().pair_completed();
      return;
    }
    if (seen == PairState::FirstDone) {
      sar(c, a, b, d);
      return;
    }
    // The sibling is still writing C: compute privately and merge.
    rt_.metrics().lazy_temp();
    typename Runtime<T>::Temp temp(rt_, c.rows, d, AllocMode::Pooled);
    kernel::fill<S>(temp.region(), S::zero(), rt_.trace());
    sar(temp.region(), a, b, d);
    atomic_accumulate<S>(rt_, c, temp.region());
  }

  Runtime<T>& rt_;
  std::size_t b_;
};

// Gives C an exclusion table for the duration of a call if it has none.
template <class T>
class OutputSlots {
 public:
  OutputSlots(MatrixRegion<T>& c, std::size_t tile) {
    if (c.slots) return;
    owned_ = std::make_unique<TileExclusionTable>(c.buffer_rows, c.buffer_cols, tile);
    c.slots = owned_.get();
  }

 private:
  std::unique_ptr<TileExclusionTable> owned_;
};

template <Semiring S, class F>
void entry(Runtime<typename S::value_type>& rt, MatrixRegion<typename S::value_type> c,
           const MatrixRegion<typename S::value_type>& a, const MatrixRegion<typename S::value_type>& b, F&& body) {
  validate_operands(rt.config(), c, a, b);
  OutputSlots<typename S::value_type> slots(c, rt.base());
  run_in(rt, [&] { body(Classic<S>(rt), c); });
}

}  // namespace detail

template <Semiring S>
void co2(Runtime<typename S::value_type>& rt, const MatrixRegion<typename S::value_type>& c,
         const MatrixRegion<typename S::value_type>& a, const MatrixRegion<typename S::value_type>& b) {
  detail::entry<S>(rt, c, a, b, [&](auto alg, const auto& cr) { alg.co2(cr, a, b, 0, kernel::Mode::Accumulate); });
}

template <Semiring S>
void co3(Runtime<typename S::value_type>& rt, const MatrixRegion<typename S::value_type>& c,
         const MatrixRegion<typename S::value_type>& a, const MatrixRegion<typename S::value_type>& b,
         AllocMode mode = AllocMode::Pooled) {
  detail::entry<S>(rt, c, a, b,
                   [&](auto alg, const auto& cr) { alg.co3(cr, a, b, 0, kernel::Mode::Accumulate, mode); });
}

template <Semiring S>
void tar_mm(Runtime<typename S::value_type>& rt, const MatrixRegion<typename S::value_type>& c,
            const MatrixRegion<typename S::value_type>& a, const MatrixRegion<typename S::value_type>& b) {
  detail::entry<S>(rt, c, a, b, [&](auto alg, const auto& cr) { alg.tar(cr, a, b, 0); });
}

template <Semiring S>
void sar_mm(Runtime<typename S::value_type>& rt, const MatrixRegion<typename S::value_type>& c,
            const MatrixRegion<typename S::value_type>& a, const MatrixRegion<typename S::value_type>& b) {
  detail::entry<S>(rt, c, a, b, [&](auto alg, const auto& cr) { alg.sar(cr, a, b, 0); });
}

template <Semiring S>
void star_mm(Runtime<typename S::value_type>& rt, const MatrixRegion<typename S::value_type>& c,
             const MatrixRegion<typename S::value_type>& a, const MatrixRegion<typename S::value_type>& b) {
  unsigned k = switch_depth(rt.workers());
  detail::entry<S>(rt, c, a, b, [&](auto alg, const auto& cr) { alg.star(cr, a, b, 0, k); });
}

}  // namespace starmm
