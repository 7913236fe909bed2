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

// Logic states: the set of branch edges satisfied by one execution, with
// order and repetition erased, and its 128-bit digest.
//
// The digest is the only representation that crosses process boundaries, so
// its byte-level definition is fixed:
//   canonical bytes = edge ids sorted ascending, each as 4 bytes little-endian
//   digest          = MurmurHash3_x64_128(canonical bytes, seed 0)
// Any producer (including the target runtime) must reproduce this exactly.

#ifndef LSC_LOGIC_STATE_H_
#define LSC_LOGIC_STATE_H_

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace lsc {

struct BlockId {
  uint32_t value = 0;
  friend auto operator<=>(const BlockId &, const BlockId &) = default;
};

struct EdgeId {
  uint32_t value = 0;
  friend auto operator<=>(const EdgeId &, const EdgeId &) = default;
};

// Fingerprint of a logic state. `low` and `high` are the two 64-bit output
// words of the hash; on the wire they are written low first, little-endian.
struct Digest {
  uint64_t low = 0;
  uint64_t high = 0;

  friend auto operator<=>(const Digest &, const Digest &) = default;

  std::string ToHex() const;
};

struct DigestHash {
  size_t operator()(const Digest &d) const noexcept {
    return static_cast<size_t>(d.low ^ std::rotl(d.high, 17));
  }
};

inline constexpr uint32_t kDigestSeed = 0;

// rotl1(prev) ^ cur. Direction-sensitive, and a self-edge (a -> a) is nonzero
// for every a other than 0 and 0xFFFFFFFF.
constexpr EdgeId CombineEdge(BlockId prev, BlockId cur) {
  return EdgeId{std::rotl(prev.value, 1) ^ cur.value};
}

// Per-execution set of edges. Stored as a sorted vector without duplicates,
// so iteration order is already canonical.
class LogicState {
 public:
  LogicState() = default;
  LogicState(std::initializer_list<uint32_t> edges);

  static LogicState FromEdges(std::span<const EdgeId> edges);

  // Returns true if `edge` was not yet present.
  bool Record(EdgeId edge);
  bool Contains(EdgeId edge) const;

  size_t size() const { return edges_.size(); }
  bool empty() const { return edges_.empty(); }
  void clear() { edges_.clear(); }

  // Ascending by unsigned value.
  std::span<const uint32_t> edges() const { return edges_; }

  friend bool operator==(const LogicState &, const LogicState &) = default;
  friend auto operator<=>(const LogicState &, const LogicState &) = default;

 private:
  std::vector<uint32_t> edges_;
};

std::vector<uint8_t> CanonicalBytes(const LogicState &state);

Digest DigestOf(const LogicState &state);

// Folds a block trace into a logic state using CombineEdge on consecutive
// pairs, starting from `initial_prev`.
LogicState StateFromBlockTrace(std::span<const BlockId> blocks,
                               BlockId initial_prev = BlockId{0});

}  // namespace lsc

#endif  // LSC_LOGIC_STATE_H_
