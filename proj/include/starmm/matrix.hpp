// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "starmm/error.hpp"
#include "starmm/semiring.hpp"
#include "starmm/tile_table.hpp"

namespace starmm {

template <class T>
struct MatrixRegion;

// Dense row-major storage. Owns its elements and, optionally, the exclusion
// table guarding concurrent writers.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{}) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  MatrixRegion<T> region();
  MatrixRegion<T> region() const;

  // Address of element (0,0) in a traced execution.
  std::uint64_t trace_base = 0;

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

// A rectangular view into a row-major buffer. Recursion splits regions and
// never copies; `origin` identifies the buffer.
template <class T>
struct MatrixRegion {
  T* origin = nullptr;
  std::size_t buffer_rows = 0;
  std::size_t buffer_cols = 0;
  std::size_t row0 = 0;
  std::size_t col0 = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t stride = 0;
  TileExclusionTable* slots = nullptr;
  std::uint64_t trace_base = 0;

  T* row_ptr(std::size_t i) const { return origin + (row0 + i) * stride + col0; }
  T& at(std::size_t i, std::size_t j) const { return origin[(row0 + i) * stride + col0 + j]; }
  std::uint64_t address(std::size_t i, std::size_t j) const { return trace_base + (row0 + i) * stride + col0 + j; }

  bool square() const noexcept { return rows == cols; }
  std::size_t dim() const noexcept { return rows; }
};

template <class T>
MatrixRegion<T> make_region(T* data, std::size_t rows, std::size_t cols, TileExclusionTable* slots = nullptr,
                            std::uint64_t trace_base = 0) {
  return MatrixRegion<T>{data, rows, cols, 0, 0, rows, cols, cols, slots, trace_base};
}

template <class T>
MatrixRegion<T> Matrix<T>::region() {
  return make_region(data(), rows_, cols_, nullptr, trace_base);
}

// Read-only regions are still typed T* so that kernels share one region type;
// algorithms never write through an input region.
template <class T>
MatrixRegion<T> Matrix<T>::region() const {
  return make_region(const_cast<T*>(data()), rows_, cols_, nullptr, trace_base);
}

// The (i, j) quadrant of a square region with even extent.
template <class T>
MatrixRegion<T> quadrant(const MatrixRegion<T>& r, unsigned i, unsigned j) {
  require(r.square(), ErrorCode::InvalidSplit, "quadrant of a non-square region");
  require(r.rows % 2 == 0, ErrorCode::InvalidSplit, "quadrant of an odd-extent region");
  require(i < 2 && j < 2, ErrorCode::InvalidSplit, "quadrant index out of range");
  MatrixRegion<T> q = r;
  std::size_t h = r.rows / 2;
  q.row0 = r.row0 + i * h;
  q.col0 = r.col0 + j * h;
  q.rows = h;
  q.cols = h;
  return q;
}

template <class T>
void check_same_square(const MatrixRegion<T>& a, const MatrixRegion<T>& b) {
  require(a.square() && b.square() && a.rows == b.rows, ErrorCode::DimMismatch, "operands must be equal squares");
}

// Serial triple loop, C[i][j] = fold_k A[i][k] * B[k][j] from zero. The
// correctness oracle for every parallel schedule.
template <Semiring S>
Matrix<typename S::value_type> naive_mm(const MatrixRegion<typename S::value_type>& a,
                                        const MatrixRegion<typename S::value_type>& b) {
  check_same_square(a, b);
  std::size_t n = a.rows;
  Matrix<typename S::value_type> c(n, n, S::zero());
  // i-k-j keeps each element's fold in increasing k while streaming rows.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const auto aik = a.at(i, k);
      const auto* brow = b.row_ptr(k);
      for (std::size_t j = 0; j < n; ++j) c(i, j) = S::add(c(i, j), S::mul(aik, brow[j]));
    }
  return c;
}

template <Semiring S>
Matrix<typename S::value_type> naive_mm(const Matrix<typename S::value_type>& a,
                                        const Matrix<typename S::value_type>& b) {
  return naive_mm<S>(a.region(), b.region());
}

// Exact comparison for exact algebras, relative tolerance otherwise.
template <Semiring S>
bool matrices_equal(const Matrix<typename S::value_type>& x, const Matrix<typename S::value_type>& y,
                    double tol = 1e-9) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) {
      auto a = x(i, j);
      auto b = y(i, j);
      if constexpr (S::exact) {
        if (!(a == b)) return false;
      } else {
        double da = static_cast<double>(a), db = static_cast<double>(b);
        if (da == db) continue;
        double scale = std::max({1.0, std::abs(da), std::abs(db)});
        if (!(std::abs(da - db) <= tol * scale)) return false;
      }
    }
  return true;
}

// Largest elementwise discrepancy, for diagnostics.
template <Semiring S>
std::string describe_mismatch(const Matrix<typename S::value_type>& got, const Matrix<typename S::value_type>& want) {
  std::size_t bad = 0;
  std::ostringstream first;
  for (std::size_t i = 0; i < got.rows(); ++i)
    for (std::size_t j = 0; j < got.cols(); ++j)
      if (!(got(i, j) == want(i, j))) {
        if (bad++ == 0) first << "first at (" << i << "," << j << "): got " << got(i, j) << " want " << want(i, j);
      }
  std::ostringstream out;
  out << bad << " differing cells; " << first.str();
  return out.str();
}

// Fixture text format: "rows cols semiring-id" then row-major values; "inf"
// spells the tropical additive identity.
template <Semiring S>
void write_matrix(std::ostream& out, const Matrix<typename S::value_type>& m) {
  out << m.rows() << ' ' << m.cols() << ' ' << S::name << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      auto v = m(i, j);
      if constexpr (std::is_floating_point_v<typename S::value_type>) {
        if (std::isinf(v)) {
          out << (v > 0 ? "inf" : "-inf");
          continue;
        }
      }
      out << v;
    }
    out << '\n';
  }
}

template <Semiring S>
Matrix<typename S::value_type> read_matrix(std::istream& in) {
  std::size_t rows = 0, cols = 0;
  std::string id;
  if (!(in >> rows >> cols >> id)) fail(ErrorCode::DimMismatch, "malformed matrix header");
  if (id != S::name) fail(ErrorCode::DimMismatch, "matrix semiring is '" + id + "', expected '" + std::string(S::name) + "'");
  Matrix<typename S::value_type> m(rows, cols, S::zero());
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      std::string tok;
      if (!(in >> tok)) fail(ErrorCode::DimMismatch, "matrix body ends early");
      if constexpr (std::is_floating_point_v<typename S::value_type>) {
        if (tok == "inf") m(i, j) = std::numeric_limits<double>::infinity();
        else if (tok == "-inf") m(i, j) = -std::numeric_limits<double>::infinity();
        else m(i, j) = std::stod(tok);
      } else {
        m(i, j) = static_cast<typename S::value_type>(std::stoll(tok));
      }
    }
  return m;
}

}  // namespace starmm
