// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <atomic>
#include <functional>
#include <stdexcept>
#include <vector>

#include "starmm/algorithms.hpp"
#include "starmm/random.hpp"
#include "starmm/runtime.hpp"
#include "starmm/scheduler.hpp"

namespace starmm {
namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InternalError;
}

std::uint64_t fib(Scheduler& s, unsigned n) {
  if (n < 2) return n;
  std::uint64_t x = 0, y = 0;
  s.invoke([&] { x = fib(s, n - 1); }, [&] { y = fib(s, n - 2); });
  return x + y;
}

TEST(Scheduler, ForkJoinComputes) {
  for (unsigned p : {1u, 2u, 4u}) {
    Scheduler s(p);
    std::uint64_t r = 0;
    s.run([&] { r = fib(s, 20); });
    EXPECT_EQ(r, 6765u) << "p=" << p;
  }
}

TEST(Scheduler, SerialOutsideRun) {
  Scheduler s(4);
  std::vector<int> order;
  s.invoke([&] { order.push_back(1); }, [&] { order.push_back(2); }, [&] { order.push_back(3); });
  EXPECT_EQ(order, (std::vector<int>{1, 2, 3}));
  EXPECT_FALSE(s.inside());
}

TEST(Scheduler, InvokeAllRunsEverything) {
  Scheduler s(3);
  std::atomic<int> sum{0};
  s.run([&] {
    std::vector<std::function<void()>> fns;
    for (int i = 1; i <= 10; ++i) fns.push_back([&, i] { sum += i; });
    s.invoke_all(fns);
  });
  EXPECT_EQ(sum.load(), 55);
}

TEST(Scheduler, ExceptionsPropagateAfterSiblingsFinish) {
  Scheduler s(4);
  std::atomic<int> done{0};
  EXPECT_THROW(s.run([&] {
    s.invoke([&] { ++done; }, [&] { throw std::runtime_error("boom"); }, [&] { ++done; });
  }),
               std::runtime_error);
  EXPECT_EQ(done.load(), 2);
  std::uint64_t r = 0;
  s.run([&] { r = fib(s, 10); });
  EXPECT_EQ(r, 55u);
}

TEST(Scheduler, NestedRunRejected) {
  Scheduler s(2);
  EXPECT_EQ(code_of([&] { s.run([&] { s.run([] {}); }); }), ErrorCode::ContractViolation);
}

TEST(Metrics, FreshStateIsZero) {
  Metrics m;
  auto s = m.snapshot();
  EXPECT_TRUE(s.depth_max.empty());
  EXPECT_EQ(s.base_max, 0);
  EXPECT_EQ(s.base_tasks, 0u);
  EXPECT_EQ(s.tile_entries, 0u);
  EXPECT_EQ(s.pair_transitions(), 0u);
  EXPECT_TRUE(s.alloc_log.empty());
}

TEST(Metrics, UnbalancedExit) {
  Metrics m;
  EXPECT_EQ(code_of([&] { m.task_exit(3); }), ErrorCode::InternalError);
  EXPECT_EQ(code_of([&] { m.base_exit(); }), ErrorCode::InternalError);
  m.task_enter(3);
  m.task_exit(3);
  EXPECT_EQ(m.snapshot().depth_max.at(3), 1);
}

TEST(Metrics, GaugesTrackSimultaneity) {
  Metrics m;
  m.task_enter(0);
  m.task_enter(1);
  m.task_enter(1);
  m.task_exit(1);
  m.task_enter(1);
  auto s = m.snapshot();
  EXPECT_EQ(s.depth_max, (std::vector<std::int64_t>{1, 2}));
}

TEST(Metrics, ResetDuringRunRejected) {
  Config cfg;
  cfg.base = 2;
  Runtime<std::int64_t> rt(cfg);
  EXPECT_EQ(code_of([&] { rt.run([&] { rt.reset(); }); }), ErrorCode::ContractViolation);
  rt.reset();
}

TEST(Metrics, SerialRunGaugesAreOne) {
  Config cfg;
  cfg.base = 2;
  for (AlgoId algo : all_algorithms) {
    Runtime<std::int64_t> rt(cfg);
    auto a = random_matrix<IntRing>(16, 1), b = random_matrix<IntRing>(16, 2);
    product<IntRing>(algo, rt, a, b);
    auto s = rt.snapshot();
    EXPECT_EQ(s.base_max, 1) << to_string(algo);
    for (auto g : s.depth_max) EXPECT_LE(g, 1) << to_string(algo);
  }
}

TEST(Metrics, BusyLeavesAtFourWorkers) {
  Config cfg;
  cfg.base = 2;
  cfg.workers = 4;
  Runtime<std::int64_t> rt(cfg);
  auto a = random_matrix<IntRing>(32, 1), b = random_matrix<IntRing>(32, 2);
  for (int rep = 0; rep < 20; ++rep) {
    rt.reset();
    auto c = product<IntRing>(AlgoId::Tar, rt, a, b);
    ASSERT_EQ(c, naive_mm<IntRing>(a, b));
    auto s = rt.snapshot();
    EXPECT_LE(s.base_max, 4);
    for (auto g : s.depth_max) EXPECT_LE(g, 4);
    EXPECT_LE(s.pool.high_water_bytes, 4u * 2 * 2 * sizeof(std::int64_t));
  }
}

TEST(Runtime, TempIsReusedAcrossScopes) {
  Config cfg;
  cfg.base = 4;
  Runtime<double> rt(cfg);
  const double* first = nullptr;
  {
    Runtime<double>::Temp t(rt, 8, 1, AllocMode::Pooled);
    EXPECT_TRUE(t.fresh());
    first = &t.region().at(0, 0);
    EXPECT_EQ(t.region().slots->slot_count(), 4u);
  }
  {
    Runtime<double>::Temp t(rt, 8, 1, AllocMode::Pooled);
    EXPECT_FALSE(t.fresh());
    EXPECT_EQ(&t.region().at(0, 0), first);
  }
  {
    Runtime<double>::Temp t(rt, 8, 1, AllocMode::Raw);
    EXPECT_TRUE(t.fresh());
  }
  auto s = rt.snapshot();
  ASSERT_EQ(s.alloc_log.size(), 1u);
  EXPECT_EQ(s.alloc_log[0].depth, 1u);
  EXPECT_EQ(s.alloc_log[0].elements, 64u);
  EXPECT_EQ(s.alloc_log[0].count, 3u);
  EXPECT_EQ(s.pool.fresh_allocations, 2u);
  EXPECT_EQ(s.pool.reuses, 1u);
}

TEST(Runtime, InvalidConfigRejected) {
  Config cfg;
  cfg.base = 3;
  EXPECT_EQ(code_of([&] { Runtime<double> rt(cfg); }), ErrorCode::InvalidConfig);
  cfg.base = 4;
  cfg.cache = 32;
  EXPECT_EQ(code_of([&] { Runtime<double> rt(cfg); }), ErrorCode::InvalidConfig);
}

TEST(Runtime, TracingNeedsSerialRuntime) {
  Config cfg;
  cfg.workers = 2;
  Runtime<double> rt(cfg);
  RecordingSink sink;
  EXPECT_EQ(code_of([&] { rt.set_trace(&sink); }), ErrorCode::ContractViolation);
}

}  // namespace
}  // namespace starmm
