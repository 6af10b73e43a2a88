// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "starmm/algorithms.hpp"
#include "starmm/analysis/cache_sim.hpp"
#include "starmm/analysis/dag.hpp"
#include "starmm/analysis/recurrence.hpp"
#include "starmm/analysis/trace_record.hpp"
#include "starmm/bench.hpp"
#include "starmm/pool.hpp"
#include "starmm/random.hpp"
#include "starmm/runtime.hpp"

// The library's end-to-end checks, shared by the acceptance test binary and
// `starmm verify`.
namespace starmm::acceptance {

struct Options {
  unsigned workers = 4;                    // p for correctness runs
  ReusePolicy pool_policy = ReusePolicy::Lifo;  // anything else is a negative control
  bool strict = false;                     // gate the throughput check
};

enum class Outcome { Pass, Fail, Skip };

constexpr std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Pass: return "PASS";
    case Outcome::Fail: return "FAIL";
    case Outcome::Skip: return "SKIP";
  }
  return "?";
}

struct Result {
  Result() = default;
  explicit Result(std::string name) : id(std::move(name)) {}

  std::string id;
  Outcome outcome = Outcome::Pass;
  std::string summary;
  nlohmann::json data = nlohmann::json::object();
  double seconds = 0;

  bool failed() const { return outcome == Outcome::Fail; }
};

inline nlohmann::json to_json(const Result& r) {
  return {{"id", r.id}, {"outcome", std::string(to_string(r.outcome))}, {"summary", r.summary},
          {"seconds", r.seconds}, {"data", r.data}};
}

namespace detail {

// Collects failed sub-checks; the first few become the summary.
class Tally {
 public:
  void check(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (failures_ <= 5) notes_.push_back(what);
  }
  bool ok() const { return failures_ == 0; }
  std::string summary(const std::string& good) const {
    if (ok()) return good + " (" + std::to_string(checks_) + " checks)";
    std::ostringstream out;
    out << failures_ << " of " << checks_ << " checks failed";
    for (const auto& n : notes_) out << "; " << n;
    return out.str();
  }
  void finish(Result& r, const std::string& good) const {
    r.outcome = ok() ? Outcome::Pass : Outcome::Fail;
    r.summary = summary(good);
  }

 private:
  std::uint64_t checks_ = 0, failures_ = 0;
  std::vector<std::string> notes_;
};

template <class T>
std::unique_ptr<Runtime<T>> make_runtime(std::size_t b, unsigned p, ReusePolicy policy) {
  Config cfg;
  cfg.base = b;
  cfg.workers = p;
  auto rt = std::make_unique<Runtime<T>>(cfg);
  rt->pool().set_policy(policy);
  return rt;
}

inline std::string label(AlgoId a, std::string_view s, std::size_t n, std::size_t b, std::uint64_t seed) {
  std::ostringstream out;
  out << to_string(a) << '/' << s << " n=" << n << " b=" << b << " seed=" << seed;
  return out.str();
}

template <Semiring S>
void correctness_for(Tally& t, const Options& opt, std::size_t b, std::size_t n, std::uint64_t seed) {
  using T = typename S::value_type;
  auto rt = make_runtime<T>(b, opt.workers, opt.pool_policy);
  auto a = random_matrix<S>(n, seed * 1000003 + n);
  auto bm = random_matrix<S>(n, seed * 1000033 + n + 7);
  auto want = naive_mm<S>(a, bm);
  for (auto algo : all_algorithms) {
    rt->reset();
    if (is_strassen(algo) && !Ring<S>) {
      bool refused = false;
      try {
        product<S>(algo, *rt, a, bm);
      } catch (const Error& e) {
        refused = e.code() == ErrorCode::NoAdditiveInverse;
      }
      t.check(refused, label(algo, S::name, n, b, seed) + ": expected NoAdditiveInverse");
      continue;
    }
    auto got = product<S>(algo, *rt, a, bm);
    t.check(matrices_equal<S>(got, want, 1e-9),
            label(algo, S::name, n, b, seed) + ": " + describe_mismatch<S>(got, want));
  }
}

}  // namespace detail

// Every schedule against the naive oracle over n in {b..16b}, b in {2, 32},
// ten seeds, three algebras.
inline Result correctness(const Options& opt) {
  Result r{"correctness"};
  detail::Tally t;
  for (std::size_t b : {std::size_t{2}, std::size_t{32}})
    for (std::size_t n = b; n <= 16 * b; n *= 2)
      for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        detail::correctness_for<IntRing>(t, opt, b, n, seed);
        detail::correctness_for<Tropical>(t, opt, b, n, seed);
        detail::correctness_for<FloatRing>(t, opt, b, n, seed);
      }
  r.data = {{"workers", opt.workers}, {"seeds", 10}, {"bases", {2, 32}}};
  t.finish(r, "all schedules match the naive oracle");
  return r;
}

// Random acquire/release scripts checked against a shadow LIFO model.
inline Result pool(const Options& opt) {
  Result r{"pool"};
  detail::Tally t;
  using Pool = BlockPool<Buffer<std::int64_t>>;
  std::mt19937_64 rng(2024);

  // One worker, one size, strictly alternating: a single block serves all.
  for (int script = 0; script < 50; ++script) {
    Pool p(1);
    p.set_policy(opt.pool_policy);
    std::size_t size = 1 + rng() % 512;
    int steps = 1 + static_cast<int>(rng() % 100);
    std::optional<std::uint64_t> first;
    bool same = true;
    for (int i = 0; i < steps; ++i) {
      auto h = p.acquire(0, size);
      if (!first) first = h.id();
      same = same && h.id() == *first;
      p.release(h, 0);
    }
    t.check(p.stats().fresh_allocations == 1 && same,
            "alternating script " + std::to_string(script) + ": fresh=" + std::to_string(p.stats().fresh_allocations));
  }

  // Random interleavings, several sizes: per-size LIFO stacks, fresh count equal
  // to the peak outstanding per size, high-water equal to the shadow peak.
  for (int script = 0; script < 200; ++script) {
    Pool p(1);
    p.set_policy(opt.pool_policy);
    std::vector<std::size_t> sizes = {64, 256, 1024};
    std::map<std::size_t, std::vector<std::uint64_t>> shadow_free;
    std::map<std::size_t, std::uint64_t> outstanding_peak, outstanding;
    std::vector<Pool::Handle> issued;
    std::uint64_t live_bytes = 0, peak_bytes = 0;
    bool order_ok = true;
    int steps = 1 + static_cast<int>(rng() % 200);
    for (int i = 0; i < steps; ++i) {
      bool do_acquire = issued.empty() || rng() % 2 == 0;
      if (do_acquire) {
        std::size_t size = sizes[rng() % sizes.size()];
        auto h = p.acquire(0, size);
        auto& stack = shadow_free[size];
        if (!stack.empty()) {
          order_ok = order_ok && h.id() == stack.back() && !h.fresh();
          stack.pop_back();
        } else {
          order_ok = order_ok && h.fresh();
        }
        issued.push_back(h);
        outstanding_peak[size] = std::max(outstanding_peak[size], ++outstanding[size]);
        live_bytes += size * 8;
        peak_bytes = std::max(peak_bytes, live_bytes);
      } else {
        std::size_t idx = rng() % issued.size();
        auto h = issued[idx];
        issued.erase(issued.begin() + static_cast<std::ptrdiff_t>(idx));
        p.release(h, 0);
        shadow_free[h.size()].push_back(h.id());
        --outstanding[h.size()];
        live_bytes -= h.size() * 8;
      }
    }
    std::uint64_t expected_fresh = 0;
    for (auto [size, peak] : outstanding_peak) expected_fresh += peak;
    auto s = p.stats();
    t.check(order_ok, "script " + std::to_string(script) + ": re-issue order differs from LIFO");
    t.check(s.fresh_allocations == expected_fresh,
            "script " + std::to_string(script) + ": fresh=" + std::to_string(s.fresh_allocations) +
                " expected " + std::to_string(expected_fresh));
    t.check(s.high_water_bytes == peak_bytes, "script " + std::to_string(script) + ": high-water mismatch");
    t.check(s.fresh_allocations + s.reuses == s.acquisitions(), "acquisition identity");
    for (auto& h : issued) p.release(h, 0);
  }
  t.finish(r, "LIFO re-issue, single fresh block, per-size independence");
  return r;
}

// Instrumented temporary high-water marks against the stated bounds.
inline Result space(const Options& opt) {
  Result r{"space"};
  detail::Tally t;
  nlohmann::json rows = nlohmann::json::array();
  const std::size_t b = 8, n = 16 * b;
  auto a = random_matrix<IntRing>(n, 11);
  auto bm = random_matrix<IntRing>(n, 12);
  auto measure = [&](AlgoId algo, unsigned p) {
    auto rt = detail::make_runtime<std::int64_t>(b, p, opt.pool_policy);
    product<IntRing>(algo, *rt, a, bm);
    return rt->snapshot();
  };
  for (unsigned p : {1u, 4u, 16u})
    for (int rep = 0; rep < 5; ++rep) {
      auto tar = measure(AlgoId::Tar, p);
      std::uint64_t tar_hw = tar.pool.high_water_bytes / 8, tar_bound = std::uint64_t{p} * b * b;
      t.check(tar_hw <= tar_bound, "tar p=" + std::to_string(p) + " high-water " + std::to_string(tar_hw) + " > " +
                                       std::to_string(tar_bound));
      auto star = measure(AlgoId::Star, p);
      std::uint64_t star_hw = star.pool.high_water_bytes / 8;
      std::uint64_t star_bound = (n * n + 2) / 3 + std::uint64_t{p} * b * b;
      t.check(star_hw <= star_bound, "star p=" + std::to_string(p) + " high-water " + std::to_string(star_hw) +
                                         " > " + std::to_string(star_bound));
      if (rep == 0)
        rows.push_back({{"p", p}, {"tar_high_water", tar_hw}, {"tar_bound", tar_bound}, {"star_high_water", star_hw},
                        {"star_bound", star_bound}});
    }
  auto sar = measure(AlgoId::Sar, 1);
  t.check(sar.pool.acquisitions() == 0, "sar serial acquired " + std::to_string(sar.pool.acquisitions()) + " blocks");
  auto ss = measure(AlgoId::SarStrassen, 1);
  std::uint64_t ss_hw = ss.pool.high_water_bytes / 8;
  t.check(ss_hw <= n * n, "sar-strassen serial high-water " + std::to_string(ss_hw) + " > n^2");
  t.check(ss.scratch_acquires == ss.scratch_releases, "sar-strassen scratch acquisitions != releases");
  r.data = {{"n", n},
            {"b", b},
            {"bounds", rows},
            {"sar_serial_acquisitions", sar.pool.acquisitions()},
            {"sar_strassen_serial_high_water", ss_hw},
            {"sar_strassen_bound", n * n}};
  t.finish(r, "all high-water marks within bounds");
  return r;
}

// Task-graph longest paths and work against the recurrences, plus the growth laws.
inline Result span(const Options&) {
  Result r{"span"};
  detail::Tally t;
  using analysis::build_dag;
  using analysis::eval_recurrence;
  const std::uint64_t b = 2, M = 1 << 12, B = 8;
  for (auto algo : all_algorithms)
    for (unsigned p : {1u, 4u, 16u})
      for (std::uint64_t ratio : {2u, 4u, 8u}) {
        auto dag = build_dag(algo, ratio * b, b, p);
        auto rep = eval_recurrence(algo, ratio * b, b, p, M, B);
        auto lp = analysis::longest_path(dag);
        std::string where = std::string(to_string(algo)) + " p=" + std::to_string(p) + " n/b=" + std::to_string(ratio);
        t.check(lp == rep.span, where + ": dag span " + std::to_string(lp) + " != " + std::to_string(rep.span));
        t.check(dag.work() == rep.work, where + ": dag work " + std::to_string(dag.work()) + " != " +
                                            std::to_string(rep.work));
      }
  for (std::uint64_t n = 2; n <= 64; n *= 2) {
    auto span_of = [&](AlgoId a, std::uint64_t m) { return eval_recurrence(a, m, 1, 1, M, B).span; };
    for (auto a : {AlgoId::Co2, AlgoId::Tar})
      t.check(span_of(a, n) == 2 * span_of(a, n / 2), std::string(to_string(a)) + " span does not double at n=" +
                                                          std::to_string(n));
    for (auto a : {AlgoId::Co3, AlgoId::Sar})
      t.check(span_of(a, n) == span_of(a, n / 2) + 1, std::string(to_string(a)) + " span does not step by 1 at n=" +
                                                          std::to_string(n));
  }
  // p = 16 switches at depth 2: four serialized levels' worth of chains over
  // lazily allocating subproblems of dimension n/4.
  nlohmann::json star_rows = nlohmann::json::array();
  for (std::uint64_t ratio : {4u, 8u, 16u, 32u}) {
    std::uint64_t n = ratio * b;
    auto rep = eval_recurrence(AlgoId::Star, n, b, 16, M, B);
    std::uint64_t expected = 4 * eval_recurrence(AlgoId::Sar, n / 4, b, 16, M, B).span;
    t.check(rep.k == 2u, "star p=16 switch depth is not 2");
    t.check(rep.span == expected, "star p=16 n/b=" + std::to_string(ratio) + ": span " + std::to_string(rep.span) +
                                      " != " + std::to_string(expected));
    if (ratio <= 32) t.check(analysis::longest_path(build_dag(AlgoId::Star, n, b, 16)) == rep.span, "star p=16 dag");
    star_rows.push_back({{"n_over_b", ratio}, {"span", rep.span}});
  }
  r.data = {{"b", b}, {"star_p16", star_rows}};
  t.finish(r, "task graphs agree with the recurrences");
  return r;
}

// LRU simulation of serial traces at n=256, b=8, B=8.
inline Result cache(const Options&) {
  Result r{"cache"};
  detail::Tally t;
  const std::uint64_t n = 256, b = 8, B = 8;
  const std::vector<std::uint64_t> sizes = {1u << 12, 1u << 14, 1u << 16};
  nlohmann::json rows = nlohmann::json::array();
  auto simulate = [&](AlgoId algo, AllocMode mode) {
    analysis::CacheSink sink(sizes, B);
    analysis::run_traced(algo, n, b, SemiringId::Int, mode, sink);
    auto m = sink.misses();
    rows.push_back({{"algo", std::string(to_string(algo))}, {"mode", std::string(to_string(mode))}, {"M", sizes},
                    {"misses", m}, {"accesses", sink.accesses()}});
    return m;
  };
  auto ratio_text = [](double x) {
    std::ostringstream out;
    out.precision(3);
    out << x;
    return out.str();
  };
  for (auto algo : {AlgoId::Tar, AlgoId::Co2, AlgoId::Sar}) {
    auto m = simulate(algo, AllocMode::Pooled);
    for (std::size_t i = 0; i + 1 < m.size(); ++i) {
      double ratio = static_cast<double>(m[i + 1]) / static_cast<double>(m[i]);
      t.check(ratio >= 0.4 && ratio <= 0.6, std::string(to_string(algo)) + " pooled misses(4M)/misses(M) = " +
                                                ratio_text(ratio) + " at M=" + std::to_string(sizes[i]));
    }
  }
  auto m = simulate(AlgoId::Co3, AllocMode::Raw);
  double floor = 0.5 * static_cast<double>(n * n * n) / static_cast<double>(b * B);
  for (std::size_t i = 0; i + 1 < m.size(); ++i) {
    double ratio = static_cast<double>(m[i + 1]) / static_cast<double>(m[i]);
    t.check(ratio >= 0.9 && ratio <= 1.1, "co3 raw-alloc misses(4M)/misses(M) = " + ratio_text(ratio) + " at M=" +
                                              std::to_string(sizes[i]));
  }
  for (std::size_t i = 0; i < m.size(); ++i)
    t.check(static_cast<double>(m[i]) >= floor, "co3 raw-alloc misses " + std::to_string(m[i]) + " below floor");
  r.data = {{"n", n}, {"b", b}, {"B", B}, {"co3_raw_floor", floor}, {"runs", rows}};
  t.finish(r, "miss ratios within bands");
  return r;
}

// Simultaneous base-case tasks never exceed p.
inline Result busy_leaves(const Options& opt) {
  Result r{"busy-leaves"};
  detail::Tally t;
  const std::size_t b = 2, n = 32;
  auto a = random_matrix<IntRing>(n, 5);
  auto bm = random_matrix<IntRing>(n, 6);
  nlohmann::json rows = nlohmann::json::array();
  for (auto algo : {AlgoId::Tar, AlgoId::Star})
    for (unsigned p : {2u, 4u, 8u}) {
      auto rt = detail::make_runtime<std::int64_t>(b, p, opt.pool_policy);
      std::int64_t worst = 0;
      for (int run = 0; run < 100; ++run) {
        rt->reset();
        product<IntRing>(algo, *rt, a, bm);
        auto s = rt->snapshot();
        worst = std::max(worst, s.base_max);
        t.check(s.base_max <= static_cast<std::int64_t>(p), std::string(to_string(algo)) + " p=" +
                                                                std::to_string(p) + " run " + std::to_string(run) +
                                                                ": " + std::to_string(s.base_max) + " leaves");
      }
      rows.push_back({{"algo", std::string(to_string(algo))}, {"p", p}, {"max_leaves", worst}});
    }
  r.data = {{"n", n}, {"b", b}, {"runs", 100}, {"max", rows}};
  t.finish(r, "leaf concurrency within p");
  return r;
}

inline Result cache_bound(const Options&) {
  Result r{"cache-bound"};
  detail::Tally t;
  t.check(analysis::parallel_cache_bound(100, 4, 10, 64, 8) == 420, "hand value 420");
  t.check(analysis::parallel_cache_bound(100, 0, 10, 64, 8) == 100, "p = 0 is identity");
  t.check(analysis::parallel_cache_bound(100, 4, 0, 64, 8) == 100, "span = 0 is identity");
  t.check(analysis::parallel_cache_bound(100, 8, 10, 64, 8) - 100 == 2 * 320, "doubling p doubles the term");
  t.finish(r, "parallel cache bound plumbing");
  return r;
}

// Wall-clock sanity at n=2048, b=64. Needs 8 hardware threads; otherwise
// reported as skipped unless strict.
inline Result throughput(const Options& opt) {
  Result r{"throughput"};
  unsigned hw = std::thread::hardware_concurrency();
  r.data["hardware_threads"] = hw;
  if (hw < 8 && !opt.strict) {
    r.outcome = Outcome::Skip;
    r.summary = "needs >= 8 hardware threads, found " + std::to_string(hw) + " (soft check)";
    return r;
  }
  const std::size_t n = 2048, b = 64;
  unsigned p = std::max(1u, hw);
  auto a = random_matrix<FloatRing>(n, 21);
  auto bm = random_matrix<FloatRing>(n, 22);
  auto rt = detail::make_runtime<double>(b, p, ReusePolicy::Lifo);
  auto t_co2 = time_median_ns<FloatRing>(AlgoId::Co2, *rt, a, bm, min_bench_reps);
  auto t_co3 = time_median_ns<FloatRing>(AlgoId::Co3, *rt, a, bm, min_bench_reps);
  auto t_tar = time_median_ns<FloatRing>(AlgoId::Tar, *rt, a, bm, min_bench_reps);
  auto t_sar = time_median_ns<FloatRing>(AlgoId::Sar, *rt, a, bm, min_bench_reps);
  bool ok = t_tar <= 1.15 * static_cast<double>(t_co2) && t_sar <= 1.15 * static_cast<double>(t_co3);
  r.data.update({{"p", p}, {"co2_ns", t_co2}, {"co3_ns", t_co3}, {"tar_ns", t_tar}, {"sar_ns", t_sar}});
  std::ostringstream out;
  out.precision(3);
  out << "tar/co2 = " << static_cast<double>(t_tar) / t_co2 << ", sar/co3 = " << static_cast<double>(t_sar) / t_co3;
  r.summary = out.str();
  r.outcome = ok ? Outcome::Pass : (opt.strict ? Outcome::Fail : Outcome::Skip);
  return r;
}

using Check = std::function<Result(const Options&)>;

inline const std::vector<std::pair<std::string, Check>>& registry() {
  static const std::vector<std::pair<std::string, Check>> checks = {
      {"correctness", correctness}, {"pool", pool},         {"space", space},          {"span", span},
      {"cache", cache},             {"busy-leaves", busy_leaves}, {"cache-bound", cache_bound}, {"throughput", throughput},
  };
  return checks;
}

inline bool is_suite(std::string_view name) {
  if (name == "all") return true;
  for (const auto& [id, fn] : registry())
    if (id == name) return true;
  return false;
}

// Runs one suite ("all" for every check). `report` sees each result as it lands.
inline std::vector<Result> run(std::string_view suite, const Options& opt,
                               const std::function<void(const Result&)>& report = {}) {
  std::vector<Result> out;
  for (const auto& [id, fn] : registry()) {
    if (suite != "all" && suite != id) continue;
    auto t0 = std::chrono::steady_clock::now();
    Result res;
    try {
      res = fn(opt);
    } catch (const std::exception& e) {
      res.id = id;
      res.outcome = Outcome::Fail;
      res.summary = std::string("threw: ") + e.what();
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (report) report(res);
    out.push_back(std::move(res));
  }
  return out;
}

}  // namespace starmm::acceptance
