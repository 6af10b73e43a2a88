// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "starmm/algorithms.hpp"
#include "starmm/config.hpp"
#include "starmm/error.hpp"

// Exact integer evaluation of the cost recurrences of every schedule.
//
// Units: span counts one per base kernel, per merge level, per accumulation
// entry and per operand-forming step; work counts multiply-adds for base
// kernels and element additions for merges. Both match build_dag exactly.
namespace starmm::analysis {

struct CostReport {
  AlgoId algo = AlgoId::Co2;
  std::uint64_t n = 0, b = 0, p = 1, M = 0, B = 0;
  double epsilon = 1.0 / 3.0;
  std::uint64_t work = 0;
  std::uint64_t span = 0;
  std::uint64_t space = 0;  // temporary elements
  std::uint64_t q1 = 0;
  std::uint64_t qp = 0;
  std::optional<unsigned> k;  // switch depth for hybrid schedules
};

inline nlohmann::json to_json(const CostReport& r) {
  nlohmann::json j = {{"algo", std::string(to_string(r.algo))},
                      {"n", r.n},
                      {"b", r.b},
                      {"p", r.p},
                      {"M", r.M},
                      {"B", r.B},
                      {"epsilon", r.epsilon},
                      {"work", r.work},
                      {"span", r.span},
                      {"space", r.space},
                      {"q1", r.q1},
                      {"qp", r.qp}};
  j["k"] = r.k ? nlohmann::json(*r.k) : nlohmann::json(nullptr);
  return j;
}

// Q_p = Q_1 + p * span * M / B, with the constant taken as 1.
inline std::uint64_t parallel_cache_bound(std::uint64_t q1, std::uint64_t p, std::uint64_t span, std::uint64_t M,
                                          std::uint64_t B) {
  require(B > 0, ErrorCode::InvalidConfig, "line size must be positive");
  return q1 + p * span * M / B;
}

// Depth below which lazy allocation needs per-processor space only:
// floor((1/3) log2(7p/8 + 1/2)), i.e. the largest k with 8^(k+1) <= 7p + 4.
inline unsigned lazy_depth(std::uint64_t p) {
  unsigned k = 0;
  std::uint64_t pow = 64;
  while (pow <= 7 * p + 4) {
    ++k;
    pow *= 8;
  }
  return k;
}

namespace detail {

inline std::uint64_t ceil_div(std::uint64_t x, std::uint64_t y) { return (x + y - 1) / y; }
inline std::uint64_t sq(std::uint64_t v) { return v * v; }

// Sum of v^2 + (v/2)^2 + ... down to b^2.
inline std::uint64_t square_series(std::uint64_t v, std::uint64_t b) {
  std::uint64_t s = 0;
  for (; v >= b; v /= 2) s += sq(v);
  return s;
}

class Evaluator {
 public:
  Evaluator(std::uint64_t b, std::uint64_t p, std::uint64_t M, std::uint64_t B, double eps)
      : b_(b), p_(p), M_(M), B_(B), eps_(eps), k_(switch_depth(static_cast<unsigned>(p))) {}

  unsigned k() const { return k_; }

  bool fits(std::uint64_t footprint) const { return static_cast<double>(footprint) <= eps_ * static_cast<double>(M_); }
  std::uint64_t lines(std::uint64_t elements) const { return ceil_div(elements, B_); }

  // ---- span ----
  std::uint64_t span_co2(std::uint64_t v) const { return v == b_ ? 1 : 2 * span_co2(v / 2); }
  std::uint64_t span_co3(std::uint64_t v) const { return v == b_ ? 1 : span_co3(v / 2) + 1; }
  std::uint64_t span_tar(std::uint64_t v) const { return span_co2(v); }
  std::uint64_t span_sar(std::uint64_t v) const { return span_co3(v); }
  std::uint64_t span_star(std::uint64_t v, unsigned d) const {
    if (d >= k_) return span_sar(v);
    return v == b_ ? 1 : 2 * span_star(v / 2, d + 1);
  }
  std::uint64_t span_str(std::uint64_t v) const { return v == b_ ? 1 : span_str(v / 2) + 2; }
  std::uint64_t span_sstr(std::uint64_t v) const { return v == b_ ? 1 : span_sstr(v / 2) + 5; }
  std::uint64_t span_star1(std::uint64_t v, unsigned d) const {
    if (k_ == 0) return span_sstr(v);
    if (d < k_ && v > b_) return 2 * span_star1(v / 2, d + 1);
    return v == b_ ? 1 : span_sstr(v) + 1;
  }
  std::uint64_t span_star2(std::uint64_t v, unsigned d) const {
    if (d < k_ && v > b_) return span_star2(v / 2, d + 1) + 2;
    return span_sstr(v);
  }

  // ---- work ----
  std::uint64_t work_co2(std::uint64_t v) const { return v == b_ ? b_ * b_ * b_ : 8 * work_co2(v / 2); }
  std::uint64_t work_co3(std::uint64_t v) const { return v == b_ ? b_ * b_ * b_ : 8 * work_co3(v / 2) + sq(v); }
  std::uint64_t work_tar(std::uint64_t v) const { return v == b_ ? b_ * b_ * b_ + sq(b_) : 8 * work_tar(v / 2); }
  std::uint64_t work_sar(std::uint64_t v) const { return work_co3(v); }
  std::uint64_t work_star(std::uint64_t v, unsigned d) const {
    if (d >= k_) return work_sar(v);
    return v == b_ ? b_ * b_ * b_ + sq(b_) : 8 * work_star(v / 2, d + 1);
  }
  std::uint64_t work_str(std::uint64_t v) const {
    return v == b_ ? b_ * b_ * b_ : 7 * work_str(v / 2) + 18 * sq(v / 2);
  }
  std::uint64_t work_sstr(std::uint64_t v) const {
    return v == b_ ? b_ * b_ * b_ : 7 * work_sstr(v / 2) + 22 * sq(v / 2);
  }
  std::uint64_t work_star1(std::uint64_t v, unsigned d) const {
    if (k_ == 0) return work_sstr(v);
    if (d < k_ && v > b_) return 8 * work_star1(v / 2, d + 1);
    return v == b_ ? b_ * b_ * b_ + sq(b_) : work_sstr(v) + sq(v);
  }
  std::uint64_t work_star2(std::uint64_t v, unsigned d) const {
    if (d < k_ && v > b_) return 7 * work_star2(v / 2, d + 1) + 18 * sq(v / 2);
    return work_sstr(v);
  }

  // ---- temporary space (elements) ----
  std::uint64_t space_co3(std::uint64_t v) const { return v == b_ ? 0 : 8 * space_co3(v / 2) + sq(v); }
  // One lazily allocated half-size block per level and processor.
  std::uint64_t s1_sar(std::uint64_t v) const { return v <= b_ ? 0 : s1_sar(v / 2) + sq(v / 2); }
  std::uint64_t space_sar(std::uint64_t v, unsigned d, unsigned kl) const {
    if (v == b_) return 0;
    if (d < kl) return 8 * space_sar(v / 2, d + 1, kl) + 4 * sq(v / 2);
    return p_ * s1_sar(v);
  }
  std::uint64_t space_star(std::uint64_t n) const {
    std::uint64_t v = n >> k_;
    if (v >= b_) return p_ * s1_sar(v);
    return p_ * sq(b_);
  }
  std::uint64_t space_str(std::uint64_t v) const { return v == b_ ? 0 : 7 * space_str(v / 2) + 17 * sq(v / 2); }
  std::uint64_t s1_sstr(std::uint64_t v) const { return v <= b_ ? 0 : s1_sstr(v / 2) + 3 * sq(v / 2); }
  std::uint64_t space_star1(std::uint64_t n) const {
    if (k_ == 0) return p_ * s1_sstr(n);
    std::uint64_t v = n >> k_;
    if (v > b_) return p_ * (sq(v) + s1_sstr(v));
    return p_ * sq(b_);
  }
  std::uint64_t space_star2(std::uint64_t v, unsigned d) const {
    if (d < k_ && v > b_) return 7 * space_star2(v / 2, d + 1) + 17 * sq(v / 2);
    return p_ * s1_sstr(v);
  }

  // ---- serial cache misses ----
  std::uint64_t q_co2(std::uint64_t v) const {
    if (v == b_ || fits(3 * sq(v))) return lines(3 * sq(v));
    return 8 * q_co2(v / 2);
  }
  std::uint64_t q_tar(std::uint64_t v) const {
    if (v == b_ || fits(3 * sq(v) + sq(b_))) return lines(3 * sq(v) + sq(b_));
    return 8 * q_tar(v / 2);
  }
  std::uint64_t q_madd(std::uint64_t v) const {
    if (v <= b_ || fits(2 * sq(v))) return lines(2 * sq(v));
    return 4 * q_madd(v / 2);
  }
  std::uint64_t q_co3(std::uint64_t v) const {
    if (v == b_) return lines(3 * sq(v));
    return 8 * q_co3(v / 2) + q_madd(v);
  }
  std::uint64_t q_sar(std::uint64_t v) const {
    std::uint64_t footprint = square_series(v, b_) + 2 * sq(v);
    if (v == b_ || fits(footprint)) return lines(footprint);
    return 8 * q_sar(v / 2) + lines(2 * sq(v));
  }
  std::uint64_t q_star(std::uint64_t v, unsigned d) const {
    if (d >= k_) return q_sar(v);
    if (v == b_ || fits(3 * sq(v) + sq(b_))) return lines(3 * sq(v) + sq(b_));
    return 8 * q_star(v / 2, d + 1);
  }
  std::uint64_t q_str(std::uint64_t v) const {
    std::uint64_t footprint = 3 * sq(v) + 17 * (square_series(v, b_) - sq(v));
    if (v == b_ || fits(footprint)) return lines(footprint);
    return 7 * q_str(v / 2) + lines(3 * sq(v) + 17 * sq(v / 2));
  }
  std::uint64_t q_sstr(std::uint64_t v) const {
    std::uint64_t footprint = 3 * (square_series(v, b_) - sq(v)) + 3 * sq(v);
    if (v == b_ || fits(footprint)) return lines(footprint);
    return 7 * q_sstr(v / 2) + lines(3 * sq(v) + 3 * sq(v / 2));
  }
  std::uint64_t q_star1(std::uint64_t v, unsigned d) const {
    if (k_ == 0) return q_sstr(v);
    if (d < k_ && v > b_) {
      if (fits(3 * sq(v) + sq(b_))) return lines(3 * sq(v) + sq(b_));
      return 8 * q_star1(v / 2, d + 1);
    }
    if (v == b_) return lines(3 * sq(v) + sq(b_));
    return q_sstr(v) + lines(2 * sq(v));
  }
  std::uint64_t q_star2(std::uint64_t v, unsigned d) const {
    if (d < k_ && v > b_) {
      std::uint64_t footprint = 3 * sq(v) + 17 * (square_series(v, b_) - sq(v));
      if (fits(footprint)) return lines(footprint);
      return 7 * q_star2(v / 2, d + 1) + lines(3 * sq(v) + 17 * sq(v / 2));
    }
    return q_sstr(v);
  }

 private:
  std::uint64_t b_, p_, M_, B_;
  double eps_;
  unsigned k_;
};

}  // namespace detail

inline CostReport eval_recurrence(AlgoId algo, std::uint64_t n, std::uint64_t b, std::uint64_t p, std::uint64_t M,
                                  std::uint64_t B, double epsilon = 1.0 / 3.0) {
  require(is_pow2(b) && is_pow2(n) && n >= b, ErrorCode::InvalidSplit, "n must be a power-of-two multiple of b");
  require(p >= 1, ErrorCode::InvalidConfig, "worker count must be at least 1");
  require(B >= 1 && M >= B, ErrorCode::InvalidConfig, "cache must hold at least one line");
  require(epsilon > 0.0 && epsilon <= 1.0, ErrorCode::InvalidConfig, "epsilon must lie in (0, 1]");
  require(n / b <= (std::uint64_t{1} << 20), ErrorCode::TooLarge, "recursion too deep to evaluate exactly");
  detail::Evaluator ev(b, p, M, B, epsilon);
  CostReport r;
  r.algo = algo;
  r.n = n;
  r.b = b;
  r.p = p;
  r.M = M;
  r.B = B;
  r.epsilon = epsilon;
  switch (algo) {
    case AlgoId::Co2:
      r.span = ev.span_co2(n);
      r.work = ev.work_co2(n);
      r.space = 0;
      r.q1 = ev.q_co2(n);
      break;
    case AlgoId::Co3:
      r.span = ev.span_co3(n);
      r.work = ev.work_co3(n);
      r.space = ev.space_co3(n);
      r.q1 = ev.q_co3(n);
      break;
    case AlgoId::Tar:
      r.span = ev.span_tar(n);
      r.work = ev.work_tar(n);
      r.space = p * b * b;
      r.q1 = ev.q_tar(n);
      break;
    case AlgoId::Sar: {
      unsigned kl = lazy_depth(p);
      r.span = ev.span_sar(n);
      r.work = ev.work_sar(n);
      r.space = ev.space_sar(n, 0, kl);
      r.q1 = ev.q_sar(n);
      r.k = kl;
      break;
    }
    case AlgoId::Star:
      r.span = ev.span_star(n, 0);
      r.work = ev.work_star(n, 0);
      r.space = ev.space_star(n);
      r.q1 = ev.q_star(n, 0);
      r.k = ev.k();
      break;
    case AlgoId::Strassen:
      r.span = ev.span_str(n);
      r.work = ev.work_str(n);
      r.space = ev.space_str(n);
      r.q1 = ev.q_str(n);
      break;
    case AlgoId::SarStrassen:
      r.span = ev.span_sstr(n);
      r.work = ev.work_sstr(n);
      r.space = p * ev.s1_sstr(n);
      r.q1 = ev.q_sstr(n);
      break;
    case AlgoId::StarStrassen1:
      r.span = ev.span_star1(n, 0);
      r.work = ev.work_star1(n, 0);
      r.space = ev.space_star1(n);
      r.q1 = ev.q_star1(n, 0);
      r.k = ev.k();
      break;
    case AlgoId::StarStrassen2:
      r.span = ev.span_star2(n, 0);
      r.work = ev.work_star2(n, 0);
      r.space = ev.space_star2(n, 0);
      r.q1 = ev.q_star2(n, 0);
      r.k = ev.k();
      break;
  }
  r.qp = parallel_cache_bound(r.q1, p, r.span, M, B);
  return r;
}

}  // namespace starmm::analysis
