// Copyright 2026 The LSCov Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lsc/logic_state.h"

#include <algorithm>
#include <random>
#include <vector>

#include "gtest/gtest.h"

namespace lsc {
namespace {

TEST(CombineEdgeTest, Examples) {
  EXPECT_EQ(CombineEdge(BlockId{0x00000001}, BlockId{0x00000003}).value, 0x00000001u);
  EXPECT_EQ(CombineEdge(BlockId{0x80000000}, BlockId{0x00000000}).value, 0x00000001u);
  // rotl1(0xDEADBEEF) = 0xBD5B7DDF; xor with 0xDEADBEEF.
  const uint32_t self = CombineEdge(BlockId{0xDEADBEEF}, BlockId{0xDEADBEEF}).value;
  EXPECT_EQ(self, 0x63f6c330u);
  EXPECT_NE(self, 0u);
}

// combine(a,b) == combine(b,a)  <=>  rotl1(a)^a == rotl1(b)^b  <=>  b == ~a
// (x -> rotl1(x)^x is linear with kernel {0, ~0}). Random distinct pairs
// therefore collide with probability 1/(2^32 - 1).
TEST(CombineEdgeTest, DirectionSensitive) {
  std::mt19937_64 rng(42);
  int symmetric = 0;
  for (int i = 0; i < 10000; ++i) {
    const uint32_t a = static_cast<uint32_t>(rng());
    uint32_t b = static_cast<uint32_t>(rng());
    if (a == b) b ^= 1;
    const bool sym = CombineEdge(BlockId{a}, BlockId{b}) == CombineEdge(BlockId{b}, BlockId{a});
    EXPECT_EQ(sym, b == ~a);
    symmetric += sym;
  }
  // Expected count 10^4 / (2^32 - 1) ~ 2.3e-6.
  EXPECT_EQ(symmetric, 0);
  EXPECT_EQ(CombineEdge(BlockId{0x12345678}, BlockId{~0x12345678u}),
            CombineEdge(BlockId{~0x12345678u}, BlockId{0x12345678}));
}

TEST(LogicStateTest, RecordIsSetInsertion) {
  LogicState s;
  EXPECT_TRUE(s.Record(EdgeId{5}));
  EXPECT_EQ(s, (LogicState{5}));
  EXPECT_FALSE(s.Record(EdgeId{5}));
  EXPECT_EQ(s.size(), 1u);

  LogicState folded;
  for (uint32_t e : {3u, 1u, 3u, 2u, 1u}) folded.Record(EdgeId{e});
  EXPECT_EQ(folded, (LogicState{1, 2, 3}));
  EXPECT_TRUE(folded.Contains(EdgeId{2}));
  EXPECT_FALSE(folded.Contains(EdgeId{4}));
}

TEST(LogicStateTest, CanonicalBytes) {
  EXPECT_TRUE(CanonicalBytes(LogicState{}).empty());
  EXPECT_EQ(CanonicalBytes(LogicState{0x01}), (std::vector<uint8_t>{1, 0, 0, 0}));
  EXPECT_EQ(CanonicalBytes(LogicState{0x0102, 0x01}),
            (std::vector<uint8_t>{1, 0, 0, 0, 2, 1, 0, 0}));
  // Sorted as unsigned: 0x80000000 after 0x7fffffff.
  EXPECT_EQ(CanonicalBytes(LogicState{0x80000000u, 0x7fffffffu}),
            (std::vector<uint8_t>{0xff, 0xff, 0xff, 0x7f, 0, 0, 0, 0x80}));
}

// Frozen from the Python reference in tests/oracles/oracle_values.py.
TEST(DigestTest, ReferenceValues) {
  EXPECT_EQ(DigestOf(LogicState{}), (Digest{0, 0}));
  EXPECT_EQ(DigestOf(LogicState{1}), (Digest{0x8895a3f5af28cafeULL, 0xd3e47dee85e9be40ULL}));
  EXPECT_EQ(DigestOf(LogicState{2}), (Digest{0xda0ce907e4355b60ULL, 0xdd3f73654308ad15ULL}));
  EXPECT_EQ(DigestOf(LogicState{1, 2, 3}),
            (Digest{0x50cf51c5c3695cb5ULL, 0x4db388a324d73541ULL}));
  EXPECT_EQ(DigestOf(LogicState{0x0102, 0x01}),
            (Digest{0xf785bc4f2d889612ULL, 0x86f9be1602620da1ULL}));
  EXPECT_NE(DigestOf(LogicState{1}), DigestOf(LogicState{2}));
}

TEST(DigestTest, InsertionOrderIrrelevant) {
  LogicState a;
  for (uint32_t e : {3u, 1u, 2u}) a.Record(EdgeId{e});
  EXPECT_EQ(DigestOf(a), DigestOf(LogicState{1, 2, 3}));
}

// Permutation and repetition invariance over random edge sequences.
TEST(DigestTest, PermutationAndRepetitionProperty) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<EdgeId> seq(rng() % 64);
    for (EdgeId &e : seq) e.value = static_cast<uint32_t>(rng() % 200);
    const Digest base = DigestOf(LogicState::FromEdges(seq));

    std::vector<EdgeId> shuffled = seq;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    LogicState incremental;
    for (EdgeId e : shuffled) incremental.Record(e);
    ASSERT_EQ(DigestOf(incremental), base);

    if (seq.empty()) continue;
    std::vector<EdgeId> repeated = seq;
    const size_t extra = rng() % 100;
    for (size_t i = 0; i < extra; ++i) repeated.push_back(seq[rng() % seq.size()]);
    std::shuffle(repeated.begin(), repeated.end(), rng);
    ASSERT_EQ(DigestOf(LogicState::FromEdges(repeated)), base);
  }
}

TEST(DigestTest, BlockTraceFold) {
  const std::vector<BlockId> trace = {BlockId{10}, BlockId{20}, BlockId{10}, BlockId{20}};
  const LogicState s = StateFromBlockTrace(trace);
  // 0->10, 10->20, 20->10; the second 10->20 repeats.
  EXPECT_EQ(s.size(), 3u);
  EXPECT_TRUE(s.Contains(CombineEdge(BlockId{0}, BlockId{10})));
  EXPECT_TRUE(s.Contains(CombineEdge(BlockId{20}, BlockId{10})));
}

TEST(DigestTest, HexIsHighThenLow) {
  EXPECT_EQ((Digest{0x1, 0x2}).ToHex(), "00000000000000020000000000000001");
}

}  // namespace
}  // namespace lsc
