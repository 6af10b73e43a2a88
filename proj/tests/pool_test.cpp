// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstdint>
#include <random>
#include <vector>

#include "starmm/pool.hpp"

namespace starmm {
namespace {

using Pool = BlockPool<Buffer<double>>;

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InternalError;
}

TEST(BlockPool, ReleasedBlockComesBack) {
  Pool pool(1);
  auto h1 = pool.acquire(0, 64);
  EXPECT_TRUE(h1.fresh());
  pool.release(h1, 0);
  auto again = pool.acquire(0, 64);
  EXPECT_EQ(again, h1);
  EXPECT_FALSE(again.fresh());
}

TEST(BlockPool, NothingPooledGivesDistinctBlocks) {
  Pool pool(1);
  auto a = pool.acquire(0, 64), b = pool.acquire(0, 64);
  EXPECT_FALSE(a == b);
  EXPECT_NE(a.id(), b.id());
}

TEST(BlockPool, LifoOrder) {
  Pool pool(1);
  auto h1 = pool.acquire(0, 64), h2 = pool.acquire(0, 64);
  pool.release(h1, 0);
  pool.release(h2, 0);
  EXPECT_EQ(pool.acquire(0, 64), h2);
  EXPECT_EQ(pool.acquire(0, 64), h1);
}

TEST(BlockPool, SizesAreKeyedExactly) {
  Pool pool(1);
  auto small = pool.acquire(0, 64);
  pool.release(small, 0);
  auto big = pool.acquire(0, 256);
  EXPECT_TRUE(big.fresh());
  EXPECT_EQ(pool.acquire(0, 64), small);
}

TEST(BlockPool, DoubleReleaseRejected) {
  Pool pool(1);
  auto h = pool.acquire(0, 64);
  pool.release(h, 0);
  EXPECT_EQ(code_of([&] { pool.release(h, 0); }), ErrorCode::ContractViolation);
}

TEST(BlockPool, CrossWorkerReleaseRejected) {
  Pool pool(2);
  auto h = pool.acquire(0, 64);
  EXPECT_EQ(code_of([&] { pool.release(h, 1); }), ErrorCode::ContractViolation);
  pool.release(h, 0);
}

TEST(BlockPool, BadRequestsRejected) {
  Pool pool(2);
  EXPECT_EQ(code_of([&] { pool.acquire(0, 0); }), ErrorCode::ContractViolation);
  EXPECT_EQ(code_of([&] { pool.acquire(2, 8); }), ErrorCode::ContractViolation);
  EXPECT_EQ(code_of([&] { pool.release(Pool::Handle{}, 0); }), ErrorCode::ContractViolation);
}

TEST(BlockPool, HighWater) {
  Pool pool(1);
  EXPECT_EQ(pool.high_water(), 0u);
  auto h = pool.acquire(0, 64);
  EXPECT_EQ(pool.high_water(), 512u);
  pool.release(h, 0);
  auto g = pool.acquire(0, 64);
  auto s = pool.stats();
  EXPECT_EQ(s.high_water_bytes, 512u);
  EXPECT_EQ(s.fresh_allocations, 1u);
  EXPECT_EQ(s.reuses, 1u);
  pool.release(g, 0);
}

TEST(BlockPool, PerWorkerHighWater) {
  Pool pool(3);
  auto a = pool.acquire(0, 8), b = pool.acquire(2, 16), c = pool.acquire(2, 16);
  auto s = pool.stats();
  ASSERT_EQ(s.worker_high_water_bytes.size(), 3u);
  EXPECT_EQ(s.worker_high_water_bytes[0], 64u);
  EXPECT_EQ(s.worker_high_water_bytes[1], 0u);
  EXPECT_EQ(s.worker_high_water_bytes[2], 256u);
  EXPECT_EQ(s.high_water_bytes, 320u);
  pool.release(a, 0);
  pool.release(b, 2);
  pool.release(c, 2);
}

TEST(BlockPool, AlternatingUseAllocatesOnce) {
  Pool pool(1);
  for (int i = 0; i < 100; ++i) pool.release(pool.acquire(0, 32), 0);
  auto s = pool.stats();
  EXPECT_EQ(s.fresh_allocations, 1u);
  EXPECT_EQ(s.reuses, 99u);
  EXPECT_EQ(s.releases, 100u);
  EXPECT_EQ(s.requested_elements, 3200u);
}

TEST(BlockPool, UnpooledBlocksAreNeverReused) {
  Pool pool(1);
  auto a = pool.acquire_unpooled(0, 64);
  pool.release(a, 0);
  auto b = pool.acquire_unpooled(0, 64);
  EXPECT_TRUE(b.fresh());
  pool.release(b, 0);
  auto s = pool.stats();
  EXPECT_EQ(s.fresh_allocations, 2u);
  EXPECT_EQ(s.allocated_bytes, 0u);
  EXPECT_EQ(s.high_water_bytes, 512u);
}

TEST(BlockPool, ResetDrainsEverything) {
  Pool pool(1);
  auto h = pool.acquire(0, 64);
  EXPECT_EQ(code_of([&] { pool.reset(); }), ErrorCode::ContractViolation);
  pool.release(h, 0);
  pool.reset();
  auto s = pool.stats();
  EXPECT_EQ(s.high_water_bytes, 0u);
  EXPECT_EQ(s.fresh_allocations, 0u);
  EXPECT_EQ(s.allocated_bytes, 0u);
  EXPECT_TRUE(pool.acquire(0, 64).fresh());
}

TEST(BlockPool, SabotagedPoliciesBreakReuse) {
  Pool fifo(1);
  fifo.set_policy(ReusePolicy::Fifo);
  auto h1 = fifo.acquire(0, 8), h2 = fifo.acquire(0, 8);
  fifo.release(h1, 0);
  fifo.release(h2, 0);
  EXPECT_EQ(fifo.acquire(0, 8), h1);

  Pool never(1);
  never.set_policy(ReusePolicy::Never);
  never.release(never.acquire(0, 8), 0);
  EXPECT_TRUE(never.acquire(0, 8).fresh());
}

// A shadow LIFO pool that tracks only ids and byte totals.
struct Shadow {
  std::vector<std::vector<std::uint64_t>> free_by_size = std::vector<std::vector<std::uint64_t>>(1024);
  std::uint64_t next = 0, issued = 0, peak = 0, fresh = 0;
  std::uint64_t acquire(std::size_t size) {
    issued += size * 8;
    peak = std::max(peak, issued);
    auto& f = free_by_size[size];
    if (!f.empty()) {
      auto id = f.back();
      f.pop_back();
      return id;
    }
    ++fresh;
    return next++;
  }
  void release(std::size_t size, std::uint64_t id) {
    issued -= size * 8;
    free_by_size[size].push_back(id);
  }
};

TEST(BlockPool, MatchesShadowModel) {
  std::mt19937_64 rng(7);
  Pool pool(1);
  Shadow shadow;
  std::vector<std::pair<Pool::Handle, std::uint64_t>> live;
  const std::size_t sizes[] = {4, 16, 64, 256};
  for (int step = 0; step < 5000; ++step) {
    bool grab = live.empty() || (live.size() < 12 && rng() % 2 == 0);
    if (grab) {
      std::size_t size = sizes[rng() % 4];
      auto h = pool.acquire(0, size);
      auto id = shadow.acquire(size);
      ASSERT_EQ(h.id(), id) << "step " << step;
      live.emplace_back(h, id);
    } else {
      std::size_t i = rng() % live.size();
      auto [h, id] = live[i];
      live.erase(live.begin() + static_cast<std::ptrdiff_t>(i));
      pool.release(h, 0);
      shadow.release(h.size(), id);
    }
    ASSERT_EQ(pool.stats().issued_bytes, shadow.issued);
  }
  EXPECT_EQ(pool.high_water(), shadow.peak);
  EXPECT_EQ(pool.stats().fresh_allocations, shadow.fresh);
}

}  // namespace
}  // namespace starmm
