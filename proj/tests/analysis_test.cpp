// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "starmm/analysis/cache_sim.hpp"
#include "starmm/analysis/dag.hpp"
#include "starmm/analysis/recurrence.hpp"
#include "starmm/analysis/trace_record.hpp"

namespace starmm::analysis {
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

AccessTrace scan(std::uint64_t elements, int passes) {
  AccessTrace t;
  for (int p = 0; p < passes; ++p)
    for (std::uint64_t a = 0; a < elements; ++a) t.push_back({a, AccessKind::Read});
  return t;
}

TEST(Recurrence, Co2SpanDoubles) {
  EXPECT_EQ(eval_recurrence(AlgoId::Co2, 4, 1, 1, 1 << 12, 8).span, 4u);
  std::uint64_t want = 4;
  for (std::uint64_t n = 4; n <= 64; n *= 2, want *= 2) EXPECT_EQ(eval_recurrence(AlgoId::Co2, n, 1, 1, 1 << 12, 8).span, want);
}

TEST(Recurrence, Co3SpanAddsOnePerLevel) {
  std::uint64_t want = 3;
  for (std::uint64_t n = 4; n <= 64; n *= 2, ++want) EXPECT_EQ(eval_recurrence(AlgoId::Co3, n, 1, 1, 1 << 12, 8).span, want);
}

TEST(Recurrence, Co3SpaceClosedForm) {
  EXPECT_EQ(eval_recurrence(AlgoId::Co3, 4, 1, 1, 1 << 12, 8).space, 48u);
  for (std::uint64_t n = 2; n <= 256; n *= 2) EXPECT_EQ(eval_recurrence(AlgoId::Co3, n, 1, 1, 1 << 12, 8).space, n * n * (n - 1));
}

TEST(Recurrence, StarSwitchDepth) {
  EXPECT_EQ(eval_recurrence(AlgoId::Star, 64, 1, 16, 1 << 12, 8).k, 2u);
  EXPECT_EQ(eval_recurrence(AlgoId::Star, 64, 1, 1, 1 << 12, 8).k, 0u);
  EXPECT_FALSE(eval_recurrence(AlgoId::Co2, 64, 1, 16, 1 << 12, 8).k.has_value());
}

TEST(Recurrence, ClassicalWorkIsCubic) {
  EXPECT_EQ(eval_recurrence(AlgoId::Co2, 64, 4, 1, 1 << 12, 8).work, 64u * 64 * 64);
}

TEST(Recurrence, LazyDepth) {
  EXPECT_EQ(lazy_depth(1), 0u);
  EXPECT_EQ(lazy_depth(8), 0u);
  EXPECT_EQ(lazy_depth(9), 1u);
  EXPECT_EQ(lazy_depth(73), 2u);
}

TEST(Recurrence, Errors) {
  EXPECT_EQ(code_of([] { eval_recurrence(AlgoId::Co2, 12, 4, 1, 1 << 12, 8); }), ErrorCode::InvalidSplit);
  EXPECT_EQ(code_of([] { eval_recurrence(AlgoId::Co2, 16, 4, 0, 1 << 12, 8); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { eval_recurrence(AlgoId::Co2, 16, 4, 1, 1 << 12, 8, 0.0); }), ErrorCode::InvalidConfig);
}

TEST(ParallelCacheBound, Formula) {
  EXPECT_EQ(parallel_cache_bound(100, 4, 10, 64, 8), 420u);
  EXPECT_EQ(parallel_cache_bound(100, 0, 10, 64, 8), 100u);
  EXPECT_EQ(parallel_cache_bound(100, 4, 0, 64, 8), 100u);
}

TEST(Dag, Co2OneLevel) {
  auto d = build_dag(AlgoId::Co2, 4, 2, 1);
  EXPECT_EQ(d.count(NodeKind::Base), 8u);
  EXPECT_EQ(d.count(NodeKind::Join), 3u);
  EXPECT_EQ(d.edges.size(), 16u);
  EXPECT_EQ(longest_path(d), 2u);
}

TEST(Dag, Co3OneLevel) {
  auto d = build_dag(AlgoId::Co3, 4, 2, 1);
  EXPECT_EQ(d.count(NodeKind::Base), 8u);
  EXPECT_EQ(d.count(NodeKind::Merge), 1u);
  for (auto [from, to] : d.edges)
    EXPECT_FALSE(d.nodes[from].kind == NodeKind::Base && d.nodes[to].kind == NodeKind::Base);
  EXPECT_EQ(longest_path(d), 2u);
}

TEST(Dag, TarSerializesQuadrantPairs) {
  auto d = build_dag(AlgoId::Tar, 4, 2, 1);
  EXPECT_EQ(d.count(NodeKind::Leaf), 8u);
  std::size_t chains = 0;
  for (auto [from, to] : d.edges) chains += d.nodes[from].kind == NodeKind::Leaf && d.nodes[to].kind == NodeKind::Leaf;
  EXPECT_EQ(chains, 4u);
  EXPECT_EQ(longest_path(d), 2u);
}

TEST(Dag, StrassenProductsAreIndependent) {
  auto d = build_dag(AlgoId::Strassen, 4, 2, 1);
  EXPECT_EQ(d.count(NodeKind::Base), 7u);
  for (auto [from, to] : d.edges)
    EXPECT_FALSE(d.nodes[from].kind == NodeKind::Base && d.nodes[to].kind == NodeKind::Base);
}

TEST(Dag, StarStrassen1MultiplicationCount) {
  EXPECT_EQ(build_dag(AlgoId::StarStrassen1, 16, 2, 16).multiplications(), 64u * 7u);
  EXPECT_EQ(build_dag(AlgoId::StarStrassen1, 32, 2, 16).multiplications(), 64u * 49u);
}

TEST(Dag, TooLarge) {
  EXPECT_EQ(code_of([] { build_dag(AlgoId::Co2, 256, 2, 1); }), ErrorCode::TooLarge);
  EXPECT_NO_THROW(build_dag(AlgoId::Co2, 128, 2, 1));
}

TEST(LongestPath, SingleNode) {
  TaskDag d;
  d.add(NodeKind::Base, 0, 1, 1);
  EXPECT_EQ(longest_path(d), 1u);
}

TEST(LongestPath, CycleRejected) {
  TaskDag d;
  auto a = d.add(NodeKind::Base, 0, 1, 1), b = d.add(NodeKind::Base, 0, 1, 1);
  d.edge(a, b);
  d.edge(b, a);
  EXPECT_EQ(code_of([&] { longest_path(d); }), ErrorCode::InternalError);
}

class CrossOracle : public ::testing::TestWithParam<AlgoId> {};

TEST_P(CrossOracle, DagMatchesRecurrence) {
  for (std::uint64_t p : {1u, 4u, 16u, 64u})
    for (std::uint64_t ratio : {1u, 2u, 4u, 8u, 16u}) {
      auto dag = build_dag(GetParam(), 2 * ratio, 2, p);
      auto rep = eval_recurrence(GetParam(), 2 * ratio, 2, p, 1 << 12, 8);
      EXPECT_EQ(longest_path(dag), rep.span) << to_string(GetParam()) << " n/b=" << ratio << " p=" << p;
      EXPECT_EQ(dag.work(), rep.work) << to_string(GetParam()) << " n/b=" << ratio << " p=" << p;
    }
}

INSTANTIATE_TEST_SUITE_P(All, CrossOracle, ::testing::ValuesIn(all_algorithms), [](const auto& info) {
  std::string name(to_string(info.param));
  for (auto& ch : name)
    if (ch == '-') ch = '_';
  return name;
});

TEST(CacheSim, ColdScan) { EXPECT_EQ(simulate_cache(scan(64, 1), 64, 8), 8u); }

TEST(CacheSim, SecondPassHits) {
  EXPECT_EQ(simulate_cache(scan(64, 2), 64, 8), 8u);
  EXPECT_EQ(simulate_cache(scan(64, 2), 1 << 12, 8), 8u);
}

TEST(CacheSim, LruThrashesOneLineOver) { EXPECT_EQ(simulate_cache(scan(72, 2), 64, 8), 18u); }

TEST(CacheSim, InvalidGeometry) {
  EXPECT_EQ(code_of([] { LruCache c(48, 8); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { LruCache c(32, 8); }), ErrorCode::InvalidConfig);
}

TEST(CacheSim, SinkMatchesRecordedTrace) {
  auto t = record_trace(AlgoId::Tar, 32, 4);
  CacheSink sink({256, 1024, 4096}, 8);
  run_traced(AlgoId::Tar, 32, 4, SemiringId::Int, AllocMode::Pooled, sink);
  EXPECT_EQ(sink.accesses(), t.size());
  auto m = sink.misses();
  EXPECT_EQ(m[0], simulate_cache(t, 256, 8));
  EXPECT_EQ(m[1], simulate_cache(t, 1024, 8));
  EXPECT_EQ(m[2], simulate_cache(t, 4096, 8));
  EXPECT_GE(m[0], m[1]);
  EXPECT_GE(m[1], m[2]);
}

TEST(CacheSim, Co2ColdFloor) {
  auto t = record_trace(AlgoId::Co2, 64, 8);
  std::uint64_t misses = simulate_cache(t, 1 << 14, 8);
  EXPECT_LE(static_cast<double>(misses), static_cast<double>(distinct_addresses(t)) / 8 * 1.05);
}

TEST(Trace, BaseKernelAccessOrder) {
  auto t = record_trace(AlgoId::Co2, 1, 1);
  AccessTrace want = {{0, AccessKind::Read}, {1, AccessKind::Read}, {2, AccessKind::Read}, {2, AccessKind::Write}};
  EXPECT_EQ(t, want);
}

TEST(Trace, Co2TouchesOnlyOperands) {
  auto t = record_trace(AlgoId::Co2, 8, 4);
  EXPECT_EQ(distinct_addresses(t), 3u * 64u);
}

TEST(Trace, RawAllocationGrowsFootprintNotLength) {
  auto pooled = record_trace(AlgoId::Co3, 32, 4, SemiringId::Int, AllocMode::Pooled);
  auto raw = record_trace(AlgoId::Co3, 32, 4, SemiringId::Int, AllocMode::Raw);
  EXPECT_EQ(pooled.size(), raw.size());
  EXPECT_GT(raw.size(), distinct_addresses(pooled));
  EXPECT_GT(distinct_addresses(raw), distinct_addresses(pooled));
}

TEST(Trace, Deterministic) {
  EXPECT_EQ(record_trace(AlgoId::Sar, 16, 2), record_trace(AlgoId::Sar, 16, 2));
}

TEST(Trace, FileRoundTrip) {
  auto t = record_trace(AlgoId::Strassen, 8, 2);
  auto path = std::filesystem::temp_directory_path() / "starmm_trace_roundtrip.bin";
  write_trace(path.string(), t);
  EXPECT_EQ(read_trace(path.string()), t);
  std::filesystem::remove(path);
}

TEST(Trace, TooLarge) {
  EXPECT_EQ(code_of([] { record_trace(AlgoId::Co2, 1024, 8); }), ErrorCode::TooLarge);
  EXPECT_EQ(code_of([] { record_trace(AlgoId::Co2, 128, 64); }), ErrorCode::TooLarge);
}

TEST(Report, JsonFields) {
  auto j = to_json(eval_recurrence(AlgoId::Star, 64, 4, 16, 1 << 12, 8));
  EXPECT_EQ(j["algo"], "star");
  EXPECT_EQ(j["k"], 2);
  EXPECT_TRUE(j.contains("qp"));
  EXPECT_TRUE(to_json(eval_recurrence(AlgoId::Co2, 64, 4, 16, 1 << 12, 8))["k"].is_null());
}

}  // namespace
}  // namespace starmm::analysis
