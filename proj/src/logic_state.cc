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
#include <cstdio>

#include "lsc/murmur3.h"

namespace lsc {

std::string Digest::ToHex() const {
  char buf[33];
  std::snprintf(buf, sizeof(buf), "%016llx%016llx",
                static_cast<unsigned long long>(high),
                static_cast<unsigned long long>(low));
  return buf;
}

LogicState::LogicState(std::initializer_list<uint32_t> edges) {
  for (uint32_t e : edges) Record(EdgeId{e});
}

LogicState LogicState::FromEdges(std::span<const EdgeId> edges) {
  LogicState state;
  state.edges_.reserve(edges.size());
  for (EdgeId e : edges) state.edges_.push_back(e.value);
  std::sort(state.edges_.begin(), state.edges_.end());
  state.edges_.erase(std::unique(state.edges_.begin(), state.edges_.end()),
                     state.edges_.end());
  return state;
}

bool LogicState::Record(EdgeId edge) {
  auto it = std::lower_bound(edges_.begin(), edges_.end(), edge.value);
  if (it != edges_.end() && *it == edge.value) return false;
  edges_.insert(it, edge.value);
  return true;
}

bool LogicState::Contains(EdgeId edge) const {
  return std::binary_search(edges_.begin(), edges_.end(), edge.value);
}

std::vector<uint8_t> CanonicalBytes(const LogicState &state) {
  std::vector<uint8_t> out;
  out.reserve(state.size() * 4);
  for (uint32_t e : state.edges()) {
    out.push_back(static_cast<uint8_t>(e));
    out.push_back(static_cast<uint8_t>(e >> 8));
    out.push_back(static_cast<uint8_t>(e >> 16));
    out.push_back(static_cast<uint8_t>(e >> 24));
  }
  return out;
}

Digest DigestOf(const LogicState &state) {
  const std::vector<uint8_t> bytes = CanonicalBytes(state);
  const Hash128 h = MurmurHash3X64_128(bytes, kDigestSeed);
  return Digest{h.low, h.high};
}

LogicState StateFromBlockTrace(std::span<const BlockId> blocks,
                               BlockId initial_prev) {
  std::vector<EdgeId> edges;
  edges.reserve(blocks.size());
  BlockId prev = initial_prev;
  for (BlockId b : blocks) {
    edges.push_back(CombineEdge(prev, b));
    prev = b;
  }
  return LogicState::FromEdges(edges);
}

}  // namespace lsc
