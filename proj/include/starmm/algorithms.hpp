// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "starmm/classic.hpp"
#include "starmm/error.hpp"
#include "starmm/matrix.hpp"
#include "starmm/runtime.hpp"
#include "starmm/semiring.hpp"
#include "starmm/strassen.hpp"

namespace starmm {

enum class AlgoId { Co2, Co3, Tar, Sar, Star, Strassen, SarStrassen, StarStrassen1, StarStrassen2 };

inline constexpr std::array<AlgoId, 9> all_algorithms = {
    AlgoId::Co2,      AlgoId::Co3,         AlgoId::Tar,           AlgoId::Sar,          AlgoId::Star,
    AlgoId::Strassen, AlgoId::SarStrassen, AlgoId::StarStrassen1, AlgoId::StarStrassen2,
};

constexpr std::string_view to_string(AlgoId id) {
  switch (id) {
    case AlgoId::Co2: return "co2";
    case AlgoId::Co3: return "co3";
    case AlgoId::Tar: return "tar";
    case AlgoId::Sar: return "sar";
    case AlgoId::Star: return "star";
    case AlgoId::Strassen: return "strassen";
    case AlgoId::SarStrassen: return "sar-strassen";
    case AlgoId::StarStrassen1: return "star-strassen-1";
    case AlgoId::StarStrassen2: return "star-strassen-2";
  }
  return "?";
}

inline std::optional<AlgoId> parse_algo(std::string_view name) {
  for (auto id : all_algorithms)
    if (to_string(id) == name) return id;
  return std::nullopt;
}

inline AlgoId algo_or_throw(std::string_view name) {
  auto id = parse_algo(name);
  if (!id) fail(ErrorCode::UnsupportedAlgorithm, "unknown algorithm '" + std::string(name) + "'");
  return *id;
}

constexpr bool is_strassen(AlgoId id) {
  return id == AlgoId::Strassen || id == AlgoId::SarStrassen || id == AlgoId::StarStrassen1 ||
         id == AlgoId::StarStrassen2;
}

// Whether the algorithm honors the raw/pooled allocation switch.
constexpr bool has_alloc_mode(AlgoId id) { return id == AlgoId::Co3 || id == AlgoId::Strassen; }

inline std::optional<AllocMode> parse_alloc_mode(std::string_view s) {
  if (s == "pooled") return AllocMode::Pooled;
  if (s == "raw" || s == "raw-alloc") return AllocMode::Raw;
  return std::nullopt;
}

constexpr std::string_view to_string(AllocMode m) { return m == AllocMode::Pooled ? "pooled" : "raw-alloc"; }

// Runs `algo` on regions. Classical schedules accumulate into C, Strassen
// schedules overwrite it.
template <Semiring S>
void multiply(AlgoId algo, Runtime<typename S::value_type>& rt, const MatrixRegion<typename S::value_type>& c,
              const MatrixRegion<typename S::value_type>& a, const MatrixRegion<typename S::value_type>& b,
              AllocMode mode = AllocMode::Pooled) {
  switch (algo) {
    case AlgoId::Co2: return co2<S>(rt, c, a, b);
    case AlgoId::Co3: return co3<S>(rt, c, a, b, mode);
    case AlgoId::Tar: return tar_mm<S>(rt, c, a, b);
    case AlgoId::Sar: return sar_mm<S>(rt, c, a, b);
    case AlgoId::Star: return star_mm<S>(rt, c, a, b);
    case AlgoId::Strassen: return strassen_parallel<S>(rt, c, a, b, mode);
    case AlgoId::SarStrassen: return sar_strassen<S>(rt, c, a, b);
    case AlgoId::StarStrassen1: return star_strassen_1<S>(rt, c, a, b);
    case AlgoId::StarStrassen2: return star_strassen_2<S>(rt, c, a, b);
  }
  fail(ErrorCode::UnsupportedAlgorithm, "unknown algorithm id");
}

// C = A*B from a zero C, comparable with naive_mm for every algorithm.
template <Semiring S>
Matrix<typename S::value_type> product(AlgoId algo, Runtime<typename S::value_type>& rt,
                                       const Matrix<typename S::value_type>& a,
                                       const Matrix<typename S::value_type>& b, AllocMode mode = AllocMode::Pooled) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::DimMismatch, "operand dimensions differ");
  Matrix<typename S::value_type> c(a.rows(), a.cols(), S::zero());
  multiply<S>(algo, rt, c.region(), a.region(), b.region(), mode);
  return c;
}

}  // namespace starmm
