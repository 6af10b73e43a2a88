// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <vector>

#include "starmm/algorithms.hpp"
#include "starmm/error.hpp"
#include "starmm/matrix.hpp"
#include "starmm/runtime.hpp"
#include "starmm/semiring.hpp"

namespace starmm {

inline constexpr unsigned min_bench_reps = 5;

inline std::uint64_t median(std::vector<std::uint64_t> xs) {
  require(!xs.empty(), ErrorCode::InternalError, "median of nothing");
  std::sort(xs.begin(), xs.end());
  std::size_t m = xs.size() / 2;
  return xs.size() % 2 ? xs[m] : (xs[m - 1] + xs[m]) / 2;
}

// One warmup, then the median wall time of `reps` runs. C is reset before each
// run, outside the timed region; the pool is drained between runs.
template <Semiring S>
std::uint64_t time_median_ns(AlgoId algo, Runtime<typename S::value_type>& rt, const Matrix<typename S::value_type>& a,
                             const Matrix<typename S::value_type>& b, unsigned reps,
                             AllocMode mode = AllocMode::Pooled) {
  require(reps >= min_bench_reps, ErrorCode::InvalidConfig, "benchmarks need at least 5 repetitions");
  Matrix<typename S::value_type> c(a.rows(), a.cols(), S::zero());
  std::vector<std::uint64_t> samples;
  for (unsigned r = 0; r <= reps; ++r) {
    std::fill(c.data(), c.data() + c.rows() * c.cols(), S::zero());
    rt.reset();
    auto t0 = std::chrono::steady_clock::now();
    multiply<S>(algo, rt, c.region(), a.region(), b.region(), mode);
    auto t1 = std::chrono::steady_clock::now();
    if (r > 0) samples.push_back(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
  }
  return median(std::move(samples));
}

// (t_peer / t_algo - 1) * 100.
inline double speedup_pct(std::uint64_t algo_ns, std::uint64_t peer_ns) {
  return (static_cast<double>(peer_ns) / static_cast<double>(algo_ns) - 1.0) * 100.0;
}

}  // namespace starmm
