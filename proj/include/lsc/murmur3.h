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

#ifndef LSC_MURMUR3_H_
#define LSC_MURMUR3_H_

#include <cstdint>
#include <span>

namespace lsc {

// Output of MurmurHash3_x64_128. `low` is the first 64-bit word written by the
// reference implementation (h1), `high` the second (h2).
struct Hash128 {
  uint64_t low = 0;
  uint64_t high = 0;

  friend bool operator==(const Hash128 &, const Hash128 &) = default;
};

// MurmurHash3 x64 128-bit variant. Blocks are read little-endian regardless of
// host byte order so results are identical on every platform.
Hash128 MurmurHash3X64_128(std::span<const uint8_t> data, uint32_t seed);

}  // namespace lsc

#endif  // LSC_MURMUR3_H_
