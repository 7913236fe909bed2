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

// Bloom filter over logic-state digests, used as a distinct counter.
//
// The filter keeps a running count of set bits (`ones`) so the cardinality
// estimate is O(1) and never scans the bitmap:
//
//   estimate(X) = ln(1 - X/n_bits) / (n_hashes * ln(1 - 1/n_bits))
//
// Bits are stored in 64-bit atomic words. Any number of threads may call
// Add()/AddBatch() concurrently with one reader calling Estimate(); the
// counters lag the bitmap by at most the adds in flight.

#ifndef LSC_COVERAGE_FILTER_H_
#define LSC_COVERAGE_FILTER_H_

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "lsc/logic_state.h"

namespace lsc {

struct FilterParams {
  uint64_t n_bits = 0;
  uint32_t n_hashes = 0;

  static constexpr uint64_t kMinBits = 64;
  static constexpr uint32_t kMaxHashes = 16;

  // Throws std::invalid_argument unless n_bits >= 64 and 1 <= n_hashes <= 16.
  void Validate() const;

  friend bool operator==(const FilterParams &, const FilterParams &) = default;
};

// Optimal parameters for `expected_elements` insertions at false-positive
// rate `epsilon`:
//   n_bits   = ceil(-n * ln(eps) / ln(2)^2)
//   n_hashes = max(1, round(-log2(eps)))
// The result is the raw formula output. It is not rounded to a power of two
// and may be below FilterParams::kMinBits for tiny inputs.
FilterParams DeriveParams(uint64_t expected_elements, double epsilon);

// 24 h x 3600 s x 1000 exec/s worth of distinct states at eps = 0.05 derives
// ~538 Mbit; the default rounds that down to 2^29 bits (64 MiB) and 4 hashes.
FilterParams DefaultParams();

// Double hashing: index_i = (low + i * high) mod n_bits, computed exactly.
void BitIndices(const Digest &d, const FilterParams &params,
                std::span<uint64_t> out);
std::vector<uint64_t> BitIndices(const Digest &d, const FilterParams &params);

class SaturatedFilterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SnapshotFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Density at which estimates are still characterized; above it the filter
// logs a warning.
inline constexpr double kDensityWarning = 0.9;

class CoverageFilter {
 public:
  explicit CoverageFilter(FilterParams params);

  CoverageFilter(const CoverageFilter &other);
  CoverageFilter &operator=(const CoverageFilter &other);
  CoverageFilter(CoverageFilter &&) noexcept = default;
  CoverageFilter &operator=(CoverageFilter &&) noexcept = default;

  const FilterParams &params() const { return params_; }
  uint64_t ones() const { return ones_->load(std::memory_order_relaxed); }
  uint64_t adds() const { return adds_->load(std::memory_order_relaxed); }
  double density() const {
    return static_cast<double>(ones()) / static_cast<double>(params_.n_bits);
  }
  bool saturated() const { return ones() >= params_.n_bits; }

  // Sets the digest's bits and returns how many of them went 0 -> 1.
  uint32_t Add(const Digest &d);

  // Adds every digest. OpenMP-parallel over the batch; returns the total
  // number of bits that went 0 -> 1. Final state is identical to calling
  // Add() on each element in any order.
  uint64_t AddBatch(std::span<const Digest> digests);
  // Single-threaded reference for AddBatch().
  uint64_t AddBatchSerial(std::span<const Digest> digests);

  bool MayContain(const Digest &d) const;

  // Throws SaturatedFilterError when every bit is set.
  double Estimate() const;
  static double EstimateFromOnes(uint64_t ones, const FilterParams &params);

  // Full bitmap scans, for verification only.
  uint64_t PopcountScan() const;
  uint64_t PopcountScanSerial() const;

  // Zeroes every word (touching all pages) and resets the counters.
  void Clear();

  // Bytes held by the bitmap and counters.
  size_t FootprintBytes() const;

  // Layout (little-endian):
  //   "LSCF" | version u16 | n_hashes u16 | n_bits u64 | adds u64 | ones u64
  //   | bitmap, ceil(n_bits / 8) bytes, bit i at byte i/8, bit i%8
  std::vector<uint8_t> Serialize() const;
  // Throws SnapshotFormatError on bad magic or version, truncation, trailing
  // bytes, set padding bits, or a `ones` field that disagrees with the
  // bitmap popcount.
  static CoverageFilter Deserialize(std::span<const uint8_t> bytes);

  // Bitmap and both counters equal.
  bool IdenticalTo(const CoverageFilter &other) const;

  static constexpr uint16_t kSnapshotVersion = 1;
  static constexpr size_t kSnapshotHeaderBytes = 32;

 private:
  size_t words() const { return words_.size(); }

  FilterParams params_;
  std::vector<std::atomic<uint64_t>> words_;
  // Heap-allocated so the filter stays movable.
  std::unique_ptr<std::atomic<uint64_t>> ones_;
  std::unique_ptr<std::atomic<uint64_t>> adds_;
};

// Exact set of digests; ground truth for estimator checks.
class OracleSet {
 public:
  // True iff `d` was absent.
  bool Add(const Digest &d) { return set_.insert(d).second; }
  bool Contains(const Digest &d) const { return set_.contains(d); }
  size_t count() const { return set_.size(); }
  void Merge(const OracleSet &other) { set_.insert(other.set_.begin(), other.set_.end()); }

 private:
  std::unordered_set<Digest, DigestHash> set_;
};

// Non-normative spread of the estimator at a given load: fills `reps` fresh
// filters with `n` pseudo-random distinct digests each and reports the
// extreme relative errors observed. Desk-scale parameters only.
struct EstimateSpread {
  double min_rel_error = 0;
  double max_rel_error = 0;
};
EstimateSpread SimulateEstimateSpread(const FilterParams &params, uint64_t n,
                                      int reps, uint64_t seed);

}  // namespace lsc

#endif  // LSC_COVERAGE_FILTER_H_
