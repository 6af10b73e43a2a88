// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "starmm/error.hpp"
#include "starmm/matrix.hpp"
#include "starmm/semiring.hpp"
#include "starmm/trace.hpp"

// Serial element kernels. Every schedule in the library funnels its
// arithmetic through these, so all algorithms share one base kernel.
namespace starmm::kernel {

enum class Mode {
  Accumulate,  // C <- C + A*B
  Overwrite,   // C <- 0 + A*B (first write into an uninitialized temporary)
};

// C (+)= A (x) B on b x b regions, i-k-j order. Per element the k-fold runs in
// increasing k, matching naive_mm bit for bit when C starts at zero.
template <Semiring S>
void base(const MatrixRegion<typename S::value_type>& c, const MatrixRegion<typename S::value_type>& a,
          const MatrixRegion<typename S::value_type>& b, std::size_t base_dim, Mode mode = Mode::Accumulate,
          TraceSink* trace = nullptr) {
  check_same_square(c, a);
  check_same_square(c, b);
  require(c.rows <= base_dim, ErrorCode::NotBaseCase, "region larger than the base dimension");
  const std::size_t n = c.rows;
  if (trace) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < n; ++j) {
          trace->read(a.address(i, k));
          trace->read(b.address(k, j));
          bool first = mode == Mode::Overwrite && k == 0;
          if (!first) trace->read(c.address(i, j));
          trace->write(c.address(i, j));
          auto prev = first ? S::zero() : c.at(i, j);
          c.at(i, j) = S::add(prev, S::mul(a.at(i, k), b.at(k, j)));
        }
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto* crow = c.row_ptr(i);
    const auto* arow = a.row_ptr(i);
    if (mode == Mode::Overwrite)
      for (std::size_t j = 0; j < n; ++j) crow[j] = S::zero();
    for (std::size_t k = 0; k < n; ++k) {
      const auto aik = arow[k];
      const auto* brow = b.row_ptr(k);
      for (std::size_t j = 0; j < n; ++j) crow[j] = S::add(crow[j], S::mul(aik, brow[j]));
    }
  }
}

// C <- C + scale * D elementwise (scale = one gives plain addition).
template <Semiring S>
void add_scaled(const MatrixRegion<typename S::value_type>& c, const MatrixRegion<typename S::value_type>& d,
                typename S::value_type scale, TraceSink* trace = nullptr) {
  check_same_square(c, d);
  const std::size_t n = c.rows;
  const bool unit = scale == S::one();
  for (std::size_t i = 0; i < n; ++i) {
    auto* crow = c.row_ptr(i);
    const auto* drow = d.row_ptr(i);
    if (trace) {
      for (std::size_t j = 0; j < n; ++j) {
        trace->read(c.address(i, j));
        trace->read(d.address(i, j));
        trace->write(c.address(i, j));
      }
    }
    if (unit) {
      for (std::size_t j = 0; j < n; ++j) crow[j] = S::add(crow[j], drow[j]);
    } else {
      for (std::size_t j = 0; j < n; ++j) crow[j] = S::add(crow[j], S::mul(scale, drow[j]));
    }
  }
}

template <Semiring S>
void fill(const MatrixRegion<typename S::value_type>& c, typename S::value_type value, TraceSink* trace = nullptr) {
  for (std::size_t i = 0; i < c.rows; ++i) {
    auto* crow = c.row_ptr(i);
    for (std::size_t j = 0; j < c.cols; ++j) {
      if (trace) trace->write(c.address(i, j));
      crow[j] = value;
    }
  }
}

template <Semiring S>
void copy(const MatrixRegion<typename S::value_type>& dst, const MatrixRegion<typename S::value_type>& src,
          TraceSink* trace = nullptr) {
  check_same_square(dst, src);
  for (std::size_t i = 0; i < dst.rows; ++i) {
    auto* drow = dst.row_ptr(i);
    const auto* srow = src.row_ptr(i);
    for (std::size_t j = 0; j < dst.cols; ++j) {
      if (trace) {
        trace->read(src.address(i, j));
        trace->write(dst.address(i, j));
      }
      drow[j] = srow[j];
    }
  }
}

// dst <- x + y, or x - y when `subtract` (rings only).
template <Semiring S>
void combine(const MatrixRegion<typename S::value_type>& dst, const MatrixRegion<typename S::value_type>& x,
             const MatrixRegion<typename S::value_type>& y, bool subtract, TraceSink* trace = nullptr) {
  check_same_square(dst, x);
  check_same_square(dst, y);
  for (std::size_t i = 0; i < dst.rows; ++i) {
    auto* drow = dst.row_ptr(i);
    const auto* xrow = x.row_ptr(i);
    const auto* yrow = y.row_ptr(i);
    if (trace) {
      for (std::size_t j = 0; j < dst.cols; ++j) {
        trace->read(x.address(i, j));
        trace->read(y.address(i, j));
        trace->write(dst.address(i, j));
      }
    }
    if (subtract) {
      if constexpr (Ring<S>) {
        for (std::size_t j = 0; j < dst.cols; ++j) drow[j] = S::sub(xrow[j], yrow[j]);
      } else {
        fail(ErrorCode::NoAdditiveInverse, "subtraction requires a ring");
      }
    } else {
      for (std::size_t j = 0; j < dst.cols; ++j) drow[j] = S::add(xrow[j], yrow[j]);
    }
  }
}

}  // namespace starmm::kernel
