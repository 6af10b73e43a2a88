// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "starmm/algorithms.hpp"
#include "starmm/config.hpp"
#include "starmm/error.hpp"
#include "starmm/random.hpp"
#include "starmm/runtime.hpp"
#include "starmm/semiring.hpp"
#include "starmm/trace.hpp"

namespace starmm::analysis {

inline constexpr std::uint64_t max_trace_n = 512;
inline constexpr std::uint64_t max_trace_b = 32;

// Serial instrumented execution. A occupies addresses [0, n^2), B [n^2, 2n^2),
// C [2n^2, 3n^2); temporaries get fresh ranges when first allocated.
template <Semiring S>
void run_traced(AlgoId algo, std::uint64_t n, std::uint64_t b, AllocMode mode, TraceSink& sink,
                std::uint64_t seed = 1) {
  require(n <= max_trace_n && b <= max_trace_b, ErrorCode::TooLarge, "traces are limited to n <= 512, b <= 32");
  Config cfg;
  cfg.base = b;
  cfg.workers = 1;
  Runtime<typename S::value_type> rt(cfg);
  auto a = random_matrix<S>(n, seed);
  auto bm = random_matrix<S>(n, seed + 1);
  Matrix<typename S::value_type> c(n, n, S::zero());
  a.trace_base = sink.reserve(n * n);
  bm.trace_base = sink.reserve(n * n);
  c.trace_base = sink.reserve(n * n);
  rt.set_trace(&sink);
  multiply<S>(algo, rt, c.region(), a.region(), bm.region(), mode);
}

inline void run_traced(AlgoId algo, std::uint64_t n, std::uint64_t b, SemiringId s, AllocMode mode, TraceSink& sink,
                       std::uint64_t seed = 1) {
  dispatch_semiring(s, [&]<class S>() { run_traced<S>(algo, n, b, mode, sink, seed); });
}

inline AccessTrace record_trace(AlgoId algo, std::uint64_t n, std::uint64_t b, SemiringId s = SemiringId::Int,
                                AllocMode mode = AllocMode::Pooled, std::uint64_t seed = 1) {
  RecordingSink sink;
  run_traced(algo, n, b, s, mode, sink, seed);
  return std::move(sink.trace);
}

}  // namespace starmm::analysis
