// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0
//
// starmm: run, benchmark, analyze and verify the multiplication schedules.
//
// Exit status: 0 ok, 1 verification failure (oracle mismatch or failed
// acceptance check), 2 invalid input, 3 runtime failure.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "starmm/acceptance.hpp"
#include "starmm/starmm.hpp"

namespace {

using namespace starmm;
using nlohmann::json;

constexpr int exit_ok = 0;
constexpr int exit_verify = 1;
constexpr int exit_input = 2;
constexpr int exit_runtime = 3;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::AllocFailure:
    case ErrorCode::ContractViolation:
    case ErrorCode::InternalError:
      return exit_runtime;
    default:
      return exit_input;
  }
}

struct Options {
  std::string algo = "co2";
  std::string semiring = "int";
  std::string n = "64";
  std::size_t b = 32;
  unsigned p = 1;
  std::string M = "32768";
  std::uint64_t B = 8;
  double epsilon = 1.0 / 3.0;
  std::uint64_t seed = 1;
  std::string mode = "pooled";
  unsigned reps = min_bench_reps;
  std::string out;
};

unsigned workers(const Options& o) {
  if (const char* env = std::getenv("STAR_MM_THREADS")) {
    try {
      long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    fail(ErrorCode::InvalidConfig, std::string("STAR_MM_THREADS must be a positive integer, got '") + env + "'");
  }
  return o.p;
}

SemiringId semiring_of(const std::string& s) {
  for (auto id : {SemiringId::Int, SemiringId::Float, SemiringId::Tropical})
    if (to_string(id) == s) return id;
  fail(ErrorCode::InvalidConfig, "unknown semiring '" + s + "' (int, float, tropical)");
}

AllocMode mode_of(const std::string& s) {
  auto m = parse_alloc_mode(s);
  if (!m) fail(ErrorCode::InvalidConfig, "unknown mode '" + s + "' (pooled, raw)");
  return *m;
}

std::uint64_t to_u64(const std::string& s) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size()) fail(ErrorCode::InvalidConfig, "not a number: '" + s + "'");
  return v;
}

// "64", "16,32,64" or "4..64" (powers of two in the closed range).
std::vector<std::uint64_t> size_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  if (auto dots = s.find(".."); dots != std::string::npos) {
    std::uint64_t lo = to_u64(s.substr(0, dots)), hi = to_u64(s.substr(dots + 2));
    if (!is_pow2(lo) || lo > hi) fail(ErrorCode::InvalidConfig, "range must start at a power of two: '" + s + "'");
    for (std::uint64_t v = lo; v <= hi; v *= 2) out.push_back(v);
    return out;
  }
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(to_u64(item));
  if (out.empty()) fail(ErrorCode::InvalidConfig, "empty size list");
  return out;
}

std::vector<AlgoId> algo_list(const std::string& s) {
  if (s == "all") return {all_algorithms.begin(), all_algorithms.end()};
  std::vector<AlgoId> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(algo_or_throw(item));
  return out;
}

std::size_t single_n(const Options& o) {
  auto ns = size_list(o.n);
  if (ns.size() != 1) fail(ErrorCode::InvalidConfig, "this command takes a single --n");
  return ns.front();
}

void emit(const json& j, const std::string& path) {
  std::cout << j.dump(2) << '\n';
  if (path.empty()) return;
  std::ofstream f(path);
  if (!f) fail(ErrorCode::InternalError, "cannot write " + path);
  f << j.dump(2) << '\n';
}

// ---- run ----

template <Semiring S>
int run_one(const Options& o, AlgoId algo) {
  std::size_t n = single_n(o);
  Config cfg;
  cfg.base = o.b;
  cfg.workers = workers(o);
  Runtime<typename S::value_type> rt(cfg);
  auto a = random_matrix<S>(n, o.seed);
  auto b = random_matrix<S>(n, o.seed + 1);
  Matrix<typename S::value_type> c(n, n, S::zero());
  auto t0 = std::chrono::steady_clock::now();
  multiply<S>(algo, rt, c.region(), a.region(), b.region(), mode_of(o.mode));
  auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count();
  auto want = naive_mm<S>(a, b);
  bool ok = matrices_equal<S>(c, want, 1e-9);
  json j = {{"status", ok ? "ok" : "mismatch"},
            {"algo", std::string(to_string(algo))},
            {"semiring", std::string(S::name)},
            {"n", n},
            {"b", o.b},
            {"p", cfg.workers},
            {"seed", o.seed},
            {"mode", std::string(to_string(mode_of(o.mode)))},
            {"elapsed_ns", ns},
            {"metrics", to_json(rt.snapshot())}};
  if (!ok) j["diff"] = describe_mismatch<S>(c, want);
  emit(j, o.out);
  return ok ? exit_ok : exit_verify;
}

int cmd_run(const Options& o) {
  AlgoId algo = algo_or_throw(o.algo);
  return dispatch_semiring(semiring_of(o.semiring), [&]<class S>() { return run_one<S>(o, algo); });
}

// ---- bench ----

template <Semiring S>
int bench_all(const Options& o) {
  auto algos = algo_list(o.algo);
  auto ns = size_list(o.n);
  require(o.reps >= min_bench_reps, ErrorCode::InvalidConfig, "--reps must be at least 5");
  Config cfg;
  cfg.base = o.b;  // one b for the whole comparison set
  cfg.workers = workers(o);
  Runtime<typename S::value_type> rt(cfg);
  AllocMode mode = mode_of(o.mode);
  std::ostringstream csv;
  csv << "algo,n,b,p,median_ns,speedup_vs_co2_pct,speedup_vs_co3_pct\n";
  for (auto n : ns) {
    auto a = random_matrix<S>(n, o.seed);
    auto b = random_matrix<S>(n, o.seed + 1);
    auto t_co2 = time_median_ns<S>(AlgoId::Co2, rt, a, b, o.reps);
    auto t_co3 = time_median_ns<S>(AlgoId::Co3, rt, a, b, o.reps, mode);
    for (auto algo : algos) {
      std::uint64_t t = algo == AlgoId::Co2   ? t_co2
                        : algo == AlgoId::Co3 ? t_co3
                                              : time_median_ns<S>(algo, rt, a, b, o.reps, mode);
      csv << to_string(algo) << ',' << n << ',' << o.b << ',' << cfg.workers << ',' << t << ',' << std::fixed
          << std::setprecision(2) << speedup_pct(t, t_co2) << ',' << speedup_pct(t, t_co3) << '\n';
      csv.unsetf(std::ios::fixed);
    }
  }
  if (o.out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream f(o.out);
    if (!f) fail(ErrorCode::InternalError, "cannot write " + o.out);
    f << csv.str();
  }
  return exit_ok;
}

int cmd_bench(const Options& o) {
  return dispatch_semiring(semiring_of(o.semiring), [&]<class S>() { return bench_all<S>(o); });
}

// ---- analyze ----

int cmd_analyze(const Options& o, const std::string& ps) {
  auto algos = algo_list(o.algo);
  auto ns = size_list(o.n);
  auto pl = size_list(ps);
  auto ml = size_list(o.M);
  json rows = json::array();
  std::cout << std::left << std::setw(16) << "algo" << std::right << std::setw(8) << "n" << std::setw(6) << "p"
            << std::setw(10) << "M" << std::setw(16) << "work" << std::setw(10) << "span" << std::setw(14) << "space"
            << std::setw(14) << "Q1" << std::setw(16) << "Qp" << std::setw(4) << "k" << '\n';
  for (auto algo : algos)
    for (auto p : pl)
      for (auto M : ml)
        for (auto n : ns) {
          auto r = analysis::eval_recurrence(algo, n, o.b, p, M, o.B, o.epsilon);
          std::cout << std::left << std::setw(16) << to_string(algo) << std::right << std::setw(8) << n
                    << std::setw(6) << p << std::setw(10) << M << std::setw(16) << r.work << std::setw(10) << r.span
                    << std::setw(14) << r.space << std::setw(14) << r.q1 << std::setw(16) << r.qp << std::setw(4)
                    << (r.k ? std::to_string(*r.k) : "-") << '\n';
          rows.push_back(analysis::to_json(r));
        }
  if (!o.out.empty()) {
    std::ofstream f(o.out);
    if (!f) fail(ErrorCode::InternalError, "cannot write " + o.out);
    f << rows.dump(2) << '\n';
  }
  return exit_ok;
}

// ---- simulate ----

int cmd_simulate(const Options& o, const std::string& trace_out) {
  AlgoId algo = algo_or_throw(o.algo);
  std::size_t n = single_n(o);
  auto sizes = size_list(o.M);
  AllocMode mode = mode_of(o.mode);
  SemiringId s = semiring_of(o.semiring);
  analysis::CacheSink sink(sizes, o.B);
  std::uint64_t distinct = 0;
  if (!trace_out.empty()) {
    auto trace = analysis::record_trace(algo, n, o.b, s, mode, o.seed);
    write_trace(trace_out, trace);
    distinct = distinct_addresses(trace);
    for (const auto& a : trace) sink.on_access(a.address, a.kind);
  } else {
    analysis::run_traced(algo, n, o.b, s, mode, sink, o.seed);
  }
  auto misses = sink.misses();
  json rows = json::array();
  std::cout << std::setw(10) << "M" << std::setw(14) << "misses" << std::setw(18) << "misses*sqrt(M)" << '\n';
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    double scaled = static_cast<double>(misses[i]) * std::sqrt(static_cast<double>(sizes[i]));
    std::cout << std::setw(10) << sizes[i] << std::setw(14) << misses[i] << std::setw(18) << std::setprecision(6)
              << scaled << '\n';
    rows.push_back({{"M", sizes[i]}, {"misses", misses[i]}, {"misses_sqrt_M", scaled}});
  }
  json j = {{"algo", std::string(to_string(algo))}, {"n", n},       {"b", o.b},
            {"B", o.B},                              {"mode", std::string(to_string(mode))},
            {"accesses", sink.accesses()},           {"results", rows}};
  if (distinct) j["distinct_addresses"] = distinct;
  if (!o.out.empty()) {
    std::ofstream f(o.out);
    if (!f) fail(ErrorCode::InternalError, "cannot write " + o.out);
    f << j.dump(2) << '\n';
  }
  return exit_ok;
}

// ---- verify ----

int cmd_verify(const std::string& suite, unsigned p, bool strict, const std::string& sabotage, const std::string& out) {
  if (!acceptance::is_suite(suite)) fail(ErrorCode::InvalidConfig, "unknown suite '" + suite + "'");
  acceptance::Options opt;
  opt.workers = p;
  opt.strict = strict;
  if (sabotage == "fifo") opt.pool_policy = ReusePolicy::Fifo;
  else if (sabotage == "never") opt.pool_policy = ReusePolicy::Never;
  else if (!sabotage.empty()) fail(ErrorCode::InvalidConfig, "unknown pool sabotage '" + sabotage + "'");
  auto results = acceptance::run(suite, opt, [](const acceptance::Result& r) {
    std::cerr << '[' << acceptance::to_string(r.outcome) << "] " << r.id << ": " << r.summary << '\n';
  });
  bool passed = true;
  json checks = json::array();
  for (const auto& r : results) {
    passed = passed && !r.failed();
    checks.push_back(acceptance::to_json(r));
  }
  emit({{"suite", suite}, {"passed", passed}, {"checks", checks}}, out);
  return passed ? exit_ok : exit_verify;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--algo", o.algo, "Algorithm: co2 co3 tar sar star strassen sar-strassen star-strassen-1 "
                                    "star-strassen-2 (comma list or 'all' where several are accepted)");
  cmd->add_option("--semiring", o.semiring, "int, float or tropical");
  cmd->add_option("--n", o.n, "Dimension; lists '16,32' and ranges '4..64' where accepted");
  cmd->add_option("--b", o.b, "Base-case dimension");
  cmd->add_option("--p", o.p, "Workers (STAR_MM_THREADS overrides)");
  cmd->add_option("--seed", o.seed, "Operand seed");
  cmd->add_option("--mode", o.mode, "pooled or raw");
  cmd->add_option("--out", o.out, "Write the report to this file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel semiring matrix multiplication schedules"};
  app.require_subcommand(1);
  Options o;

  auto* run = app.add_subcommand("run", "Run one schedule and check it against the naive product");
  add_common(run, o);

  auto* bench = app.add_subcommand("bench", "Time schedules, CSV with speedups over co2 and co3");
  add_common(bench, o);
  bench->add_option("--reps", o.reps, "Timed repetitions after one warmup (>= 5)");

  std::string ps = "1";
  auto* analyze = app.add_subcommand("analyze", "Evaluate the cost recurrences over a grid");
  analyze->add_option("--algo", o.algo);
  analyze->add_option("--n", o.n);
  analyze->add_option("--b", o.b);
  analyze->add_option("--p", ps, "Worker counts, list or range");
  analyze->add_option("--M", o.M, "Cache sizes in elements, list or range");
  analyze->add_option("--B", o.B, "Line size in elements");
  analyze->add_option("--epsilon", o.epsilon);
  analyze->add_option("--out", o.out, "Write CostReports as JSON");

  std::string trace_out;
  auto* simulate = app.add_subcommand("simulate", "Record a serial trace and simulate LRU caches");
  add_common(simulate, o);
  simulate->add_option("--M", o.M, "Cache sizes in elements, list or range");
  simulate->add_option("--B", o.B, "Line size in elements");
  simulate->add_option("--trace-out", trace_out, "Also dump the binary trace");

  std::string suite = "all", sabotage, verify_out;
  unsigned verify_p = 4;
  bool strict = false;
  auto* verify = app.add_subcommand("verify", "Run acceptance checks");
  verify->add_option("--suite", suite,
                     "all, correctness, pool, space, span, cache, busy-leaves, cache-bound or throughput");
  verify->add_option("--p", verify_p, "Workers for correctness runs");
  verify->add_flag("--strict", strict, "Gate the throughput check");
  verify->add_option("--out", verify_out);
  verify->add_option("--sabotage-pool", sabotage)->group("");  // negative control

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_input;
  }

  try {
    if (*run) return cmd_run(o);
    if (*bench) return cmd_bench(o);
    if (*analyze) return cmd_analyze(o, ps);
    if (*simulate) return cmd_simulate(o, trace_out);
    if (*verify) return cmd_verify(suite, verify_p, strict, sabotage, verify_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    std::cout << json{{"error", std::string(to_string(e.code()))}, {"message", e.what()}}.dump() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_runtime;
  }
  return exit_input;
}
