// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>

#include "starmm/matrix.hpp"
#include "starmm/semiring.hpp"

namespace starmm {

// Deterministic test operands. Integers stay small so that products never
// overflow; tropical entries are small integers with the odd +inf.
template <Semiring S>
Matrix<typename S::value_type> random_matrix(std::size_t n, std::uint64_t seed) {
  using T = typename S::value_type;
  std::mt19937_64 rng(seed);
  Matrix<T> m(n, n, S::zero());
  std::uniform_int_distribution<int> small(-9, 9);
  std::uniform_int_distribution<int> dist(0, 20);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if constexpr (std::same_as<S, IntRing>) {
        m(i, j) = small(rng);
      } else if constexpr (std::same_as<S, Tropical>) {
        int v = dist(rng);
        m(i, j) = v == 20 ? std::numeric_limits<double>::infinity() : static_cast<double>(v);
      } else {
        m(i, j) = static_cast<T>(unit(rng));
      }
    }
  return m;
}

}  // namespace starmm
