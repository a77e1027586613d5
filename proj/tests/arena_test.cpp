// Copyright 2026 The revlin Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "revlin/arena.hpp"
#include "support/programs.hpp"

namespace revlin {
namespace {

Arena checked_arena() { return Arena(ArenaOptions{std::nullopt, true}); }

TEST(Arena, AllocReturnsZeroCells) {
  Arena arena;
  const auto cells = arena.alloc(3);
  ASSERT_EQ(cells.size(), 3u);
  for (const CellId c : cells) EXPECT_EQ(arena.read(c), 0);
  EXPECT_EQ(arena.live_count(), 3u);
}

TEST(Arena, AllocZeroIsANoOp) {
  Arena arena;
  EXPECT_TRUE(arena.alloc(0).empty());
  EXPECT_EQ(arena.live_count(), 0u);
  EXPECT_EQ(arena.peak_live(), 0u);
  EXPECT_EQ(arena.op_count(), 0u);
}

TEST(Arena, PeakLiveTracksBothAllocations) {
  Arena arena;
  arena.alloc(4);
  arena.alloc(5);
  EXPECT_EQ(arena.peak_live(), 9u);
}

TEST(Arena, PeakSurvivesFree) {
  Arena arena;
  const auto a = arena.alloc(4);
  arena.free(a);
  arena.alloc(2);
  EXPECT_EQ(arena.live_count(), 2u);
  EXPECT_EQ(arena.peak_live(), 4u);
}

TEST(Arena, FreeOfUntouchedCell) {
  Arena arena;
  const auto c = arena.alloc(1);
  EXPECT_NO_THROW(arena.free(c));
  EXPECT_EQ(arena.live_count(), 0u);
}

TEST(Arena, FreeOfNonzeroCellIsGarbageLeak) {
  Arena arena;
  const auto c = arena.alloc(1);
  arena.step(Primitive::add_const(c[0], 1), Direction::kForward);
  try {
    arena.free(c);
    FAIL() << "expected GarbageLeak";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kGarbageLeak);
  }
  EXPECT_EQ(arena.live_count(), 1u);
}

TEST(Arena, StaleHandlesAreRejected) {
  Arena arena;
  const auto c = arena.alloc(1);
  arena.free(c);
  const auto fresh = arena.alloc(1);
  EXPECT_EQ(fresh[0].index, c[0].index);  // slot reused
  EXPECT_FALSE(fresh[0] == c[0]);
  try {
    arena.read(c[0]);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kInvalidCell);
  }
  EXPECT_THROW(arena.free(c), Error);
  EXPECT_THROW(arena.step(Primitive::add_const(c[0], 1), Direction::kForward), Error);
}

TEST(Arena, AddMulForward) {
  Arena arena;
  const auto c = arena.alloc(3);
  arena.step(Primitive::add_const(c[0], 1), Direction::kForward);
  arena.step(Primitive::add_const(c[1], 2), Direction::kForward);
  arena.step(Primitive::add_const(c[2], 3), Direction::kForward);
  arena.step(Primitive::add_mul(c[0], c[1], c[2]), Direction::kForward);
  EXPECT_EQ(arena.read(c[0]), 7);
  EXPECT_EQ(arena.op_count(), 4u);
}

TEST(Arena, ReadIsObservational) {
  Arena arena;
  const auto c = arena.alloc(1);
  arena.step(Primitive::add_const(c[0], Rational(3, 2)), Direction::kForward);
  const std::size_t ops = arena.op_count();
  EXPECT_EQ(arena.read(c[0]), Rational(3, 2));
  EXPECT_EQ(arena.read(c[0]), arena.read(c[0]));
  EXPECT_EQ(arena.op_count(), ops);
}

TEST(Arena, ScaleByZeroIsNonInvertible) {
  Arena arena;
  const auto c = arena.alloc(2);
  arena.step(Primitive::add_const(c[0], 5), Direction::kForward);
  for (const auto& p : {Primitive::scale(c[0], c[1]), Primitive::unscale(c[0], c[1])}) {
    try {
      arena.step(p, Direction::kForward);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::kNonInvertible);
    }
  }
  EXPECT_EQ(arena.read(c[0]), 5);
}

TEST(Arena, DivideByZero) {
  Arena arena;
  const auto c = arena.alloc(3);
  try {
    arena.step(Primitive::add_div(c[0], c[1], c[2]), Direction::kBackward);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kDivideByZero);
  }
}

TEST(Arena, AliasViolations) {
  Arena arena;
  const auto c = arena.alloc(2);
  for (const auto& p : {Primitive::add_mul(c[0], c[0], c[1]), Primitive::add_div(c[0], c[1], c[0]),
                        Primitive::scale(c[0], c[0]), Primitive::add_scaled(c[1], c[1], 2)}) {
    try {
      arena.step(p, Direction::kForward);
      FAIL() << to_string(p);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::kAliasViolation);
    }
  }
  // Squaring a different cell is fine; so is swapping a cell with itself.
  EXPECT_NO_THROW(arena.step(Primitive::add_mul(c[0], c[1], c[1]), Direction::kForward));
  EXPECT_NO_THROW(arena.step(Primitive::swap(c[0], c[0]), Direction::kForward));
}

TEST(Arena, DormantAncillaCannotBeOperatedOn) {
  Arena arena;
  const auto live = arena.alloc(1);
  const auto anc = arena.alloc_ancilla(1);
  EXPECT_EQ(arena.live_count(), 1u);
  EXPECT_EQ(arena.read(anc[0]), 0);
  EXPECT_THROW(arena.step(Primitive::add_scaled(live[0], anc[0], 1), Direction::kForward), Error);
  arena.activate(anc);
  EXPECT_EQ(arena.live_count(), 2u);
  arena.step(Primitive::add_const(anc[0], 1), Direction::kForward);
  EXPECT_THROW(arena.deactivate(anc), Error);
  EXPECT_EQ(arena.garbage_cells(), 1u);
  arena.step(Primitive::sub_const(anc[0], 1), Direction::kForward);
  arena.deactivate(anc);
  EXPECT_EQ(arena.live_count(), 1u);
  arena.free(anc);
}

TEST(ArenaProperty, EveryPrimitiveRoundTripsExactly) {
  Rng rng(2024);
  for (int walk = 0; walk < 100; ++walk) {
    Arena arena = checked_arena();
    const auto cells = arena.alloc(5);
    for (const CellId c : cells) arena.step(Primitive::add_const(c, random_rational(rng)), Direction::kForward);

    for (int trial = 0; trial < 20; ++trial) {
      const Primitive p = testing::random_primitive(rng, arena, cells);
      const Snapshot before = arena.snapshot();
      arena.step(p, Direction::kForward);
      const Snapshot after = arena.snapshot();

      std::size_t changed = 0;
      for (std::size_t i = 0; i < before.size(); ++i) changed += before[i] != after[i];
      if (p.op == Op::kSwap) {
        EXPECT_LE(changed, 2u) << to_string(p);
      } else {
        EXPECT_LE(changed, 1u) << to_string(p);
      }

      arena.step(p, Direction::kBackward);
      ASSERT_EQ(arena.snapshot(), before) << to_string(p);
      // Keep walking the state space.
      arena.step(p, Direction::kForward);
    }
  }
}

TEST(ArenaProperty, WrittenCellIsTheOnlyOneThatCanChange) {
  // A primitive whose update happens to be zero changes nothing; any change
  // is confined to dst (and a, for Swap).
  Rng rng(5);
  for (int walk = 0; walk < 25; ++walk) {
    Arena arena = checked_arena();
    const auto cells = arena.alloc(4);
    for (const CellId c : cells) arena.step(Primitive::add_const(c, random_rational(rng)), Direction::kForward);
    for (int trial = 0; trial < 20; ++trial) {
      const Primitive p = testing::random_primitive(rng, arena, cells);
      std::vector<Rational> before;
      for (const CellId c : cells) before.push_back(arena.read(c));
      arena.step(p, Direction::kForward);
      for (std::size_t i = 0; i < cells.size(); ++i) {
        const bool written = cells[i] == p.dst || (p.op == Op::kSwap && cells[i] == p.a);
        if (!written) {
          EXPECT_EQ(arena.read(cells[i]), before[i]);
        }
      }
    }
  }
}

TEST(ArenaProperty, MetricsNeverAffectValues) {
  Rng rng(77);
  Arena fresh = checked_arena();
  Arena busy = checked_arena();
  // Give `busy` unrelated history: extra cells, ops, a high peak.
  const auto noise = busy.alloc(50);
  for (const CellId c : noise) busy.step(Primitive::add_const(c, 3), Direction::kForward);
  for (const CellId c : noise) busy.step(Primitive::sub_const(c, 3), Direction::kForward);
  busy.free(noise);

  const auto cf = fresh.alloc(4);
  const auto cb = busy.alloc(4);
  for (std::size_t i = 0; i < 4; ++i) {
    const Rational v = random_rational(rng);
    fresh.step(Primitive::add_const(cf[i], v), Direction::kForward);
    busy.step(Primitive::add_const(cb[i], v), Direction::kForward);
  }
  for (int trial = 0; trial < 30; ++trial) {
    Primitive p = testing::random_primitive(rng, fresh, cf);
    Primitive q = p;
    auto remap = [&](CellId c) {
      for (std::size_t i = 0; i < 4; ++i)
        if (c == cf[i]) return cb[i];
      return c;
    };
    q.dst = remap(p.dst);
    q.a = remap(p.a);
    q.b = remap(p.b);
    fresh.step(p, Direction::kForward);
    busy.step(q, Direction::kForward);
  }
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(fresh.read(cf[i]), busy.read(cb[i]));
  EXPECT_NE(fresh.op_count(), busy.op_count());
}

TEST(Arena, BitLimitAborts) {
  Arena arena(ArenaOptions{8, false});
  const auto c = arena.alloc(1);
  arena.step(Primitive::add_const(c[0], 255), Direction::kForward);
  try {
    arena.step(Primitive::add_const(c[0], 1), Direction::kForward);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kBitLimit);
  }
  EXPECT_EQ(arena.max_bits(), 9u);
}

}  // namespace
}  // namespace revlin
