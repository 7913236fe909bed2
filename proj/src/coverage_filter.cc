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

#include "lsc/coverage_filter.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <random>

namespace lsc {
namespace {

constexpr char kMagic[4] = {'L', 'S', 'C', 'F'};

void PutLe(std::vector<uint8_t> &out, uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint64_t GetLe(const uint8_t *p, int bytes) {
  uint64_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

inline uint64_t WordCount(uint64_t n_bits) { return (n_bits + 63) / 64; }

}  // namespace

void FilterParams::Validate() const {
  if (n_bits < kMinBits) {
    throw std::invalid_argument("filter must have at least 64 bits, got " +
                                std::to_string(n_bits));
  }
  if (n_hashes < 1 || n_hashes > kMaxHashes) {
    throw std::invalid_argument("n_hashes must be in [1, 16], got " +
                                std::to_string(n_hashes));
  }
}

FilterParams DeriveParams(uint64_t expected_elements, double epsilon) {
  if (expected_elements == 0) {
    throw std::invalid_argument("expected element count must be positive");
  }
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie in (0, 1)");
  }
  const double ln2 = std::log(2.0);
  const double bits =
      std::ceil(-static_cast<double>(expected_elements) * std::log(epsilon) /
                (ln2 * ln2));
  const double hashes = std::round(-std::log2(epsilon));
  FilterParams p;
  p.n_bits = static_cast<uint64_t>(bits);
  p.n_hashes = static_cast<uint32_t>(std::max(1.0, hashes));
  return p;
}

FilterParams DefaultParams() { return FilterParams{uint64_t{1} << 29, 4}; }

void BitIndices(const Digest &d, const FilterParams &params,
                std::span<uint64_t> out) {
  const uint64_t n = params.n_bits;
  const uint64_t step = d.high % n;
  uint64_t idx = d.low % n;
  for (uint32_t i = 0; i < params.n_hashes && i < out.size(); ++i) {
    out[i] = idx;
    // idx + step < 2n <= 2^64 only if n <= 2^63; n_bits never gets close.
    idx += step;
    if (idx >= n) idx -= n;
  }
}

std::vector<uint64_t> BitIndices(const Digest &d, const FilterParams &params) {
  std::vector<uint64_t> out(params.n_hashes);
  BitIndices(d, params, out);
  return out;
}

CoverageFilter::CoverageFilter(FilterParams params)
    : params_(params),
      ones_(std::make_unique<std::atomic<uint64_t>>(0)),
      adds_(std::make_unique<std::atomic<uint64_t>>(0)) {
  params_.Validate();
  words_ = std::vector<std::atomic<uint64_t>>(WordCount(params_.n_bits));
}

CoverageFilter::CoverageFilter(const CoverageFilter &other)
    : CoverageFilter(other.params_) {
  for (size_t i = 0; i < words(); ++i) {
    words_[i].store(other.words_[i].load(std::memory_order_relaxed),
                    std::memory_order_relaxed);
  }
  ones_->store(other.ones());
  adds_->store(other.adds());
}

CoverageFilter &CoverageFilter::operator=(const CoverageFilter &other) {
  if (this != &other) *this = CoverageFilter(other);
  return *this;
}

uint32_t CoverageFilter::Add(const Digest &d) {
  std::array<uint64_t, FilterParams::kMaxHashes> idx;
  BitIndices(d, params_, idx);
  uint32_t fresh = 0;
  for (uint32_t i = 0; i < params_.n_hashes; ++i) {
    const uint64_t mask = uint64_t{1} << (idx[i] & 63);
    const uint64_t old =
        words_[idx[i] >> 6].fetch_or(mask, std::memory_order_relaxed);
    if ((old & mask) == 0) ++fresh;
  }
  if (fresh) ones_->fetch_add(fresh, std::memory_order_relaxed);
  adds_->fetch_add(1, std::memory_order_relaxed);
  return fresh;
}

uint64_t CoverageFilter::AddBatch(std::span<const Digest> digests) {
  const int64_t n = static_cast<int64_t>(digests.size());
  const uint32_t k = params_.n_hashes;
  uint64_t fresh = 0;
#pragma omp parallel for schedule(static) reduction(+ : fresh)
  for (int64_t j = 0; j < n; ++j) {
    std::array<uint64_t, FilterParams::kMaxHashes> idx;
    BitIndices(digests[j], params_, idx);
    for (uint32_t i = 0; i < k; ++i) {
      const uint64_t mask = uint64_t{1} << (idx[i] & 63);
      const uint64_t old =
          words_[idx[i] >> 6].fetch_or(mask, std::memory_order_relaxed);
      fresh += (old & mask) == 0;
    }
  }
  ones_->fetch_add(fresh, std::memory_order_relaxed);
  adds_->fetch_add(digests.size(), std::memory_order_relaxed);
  return fresh;
}

uint64_t CoverageFilter::AddBatchSerial(std::span<const Digest> digests) {
  uint64_t fresh = 0;
  for (const Digest &d : digests) fresh += Add(d);
  return fresh;
}

bool CoverageFilter::MayContain(const Digest &d) const {
  std::array<uint64_t, FilterParams::kMaxHashes> idx;
  BitIndices(d, params_, idx);
  for (uint32_t i = 0; i < params_.n_hashes; ++i) {
    const uint64_t w = words_[idx[i] >> 6].load(std::memory_order_relaxed);
    if (!(w & (uint64_t{1} << (idx[i] & 63)))) return false;
  }
  return true;
}

double CoverageFilter::EstimateFromOnes(uint64_t ones,
                                        const FilterParams &params) {
  if (ones >= params.n_bits) {
    throw SaturatedFilterError("coverage filter saturated (" +
                               std::to_string(ones) + " of " +
                               std::to_string(params.n_bits) + " bits set)");
  }
  if (ones == 0) return 0.0;
  const double n = static_cast<double>(params.n_bits);
  return std::log1p(-static_cast<double>(ones) / n) /
         (static_cast<double>(params.n_hashes) * std::log1p(-1.0 / n));
}

double CoverageFilter::Estimate() const {
  return EstimateFromOnes(ones(), params_);
}

uint64_t CoverageFilter::PopcountScan() const {
  const int64_t n = static_cast<int64_t>(words());
  uint64_t total = 0;
#pragma omp parallel for schedule(static) reduction(+ : total)
  for (int64_t i = 0; i < n; ++i) {
    total += std::popcount(words_[i].load(std::memory_order_relaxed));
  }
  return total;
}

uint64_t CoverageFilter::PopcountScanSerial() const {
  uint64_t total = 0;
  for (const auto &w : words_) total += std::popcount(w.load(std::memory_order_relaxed));
  return total;
}

void CoverageFilter::Clear() {
  const int64_t n = static_cast<int64_t>(words());
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) words_[i].store(0, std::memory_order_relaxed);
  ones_->store(0);
  adds_->store(0);
}

size_t CoverageFilter::FootprintBytes() const {
  return words() * sizeof(uint64_t) + 2 * sizeof(std::atomic<uint64_t>) +
         sizeof(*this);
}

std::vector<uint8_t> CoverageFilter::Serialize() const {
  const uint64_t bitmap_bytes = (params_.n_bits + 7) / 8;
  std::vector<uint8_t> out;
  out.reserve(kSnapshotHeaderBytes + bitmap_bytes);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  PutLe(out, kSnapshotVersion, 2);
  PutLe(out, params_.n_hashes, 2);
  PutLe(out, params_.n_bits, 8);
  PutLe(out, adds(), 8);
  PutLe(out, ones(), 8);
  for (uint64_t b = 0; b < bitmap_bytes; ++b) {
    const uint64_t w = words_[b / 8].load(std::memory_order_relaxed);
    out.push_back(static_cast<uint8_t>(w >> (8 * (b % 8))));
  }
  return out;
}

CoverageFilter CoverageFilter::Deserialize(std::span<const uint8_t> bytes) {
  if (bytes.size() < kSnapshotHeaderBytes) {
    throw SnapshotFormatError("snapshot truncated: header needs 32 bytes, got " +
                              std::to_string(bytes.size()));
  }
  const uint8_t *p = bytes.data();
  if (std::memcmp(p, kMagic, 4) != 0) throw SnapshotFormatError("bad snapshot magic");
  const uint64_t version = GetLe(p + 4, 2);
  if (version != kSnapshotVersion) {
    throw SnapshotFormatError("unsupported snapshot version " + std::to_string(version));
  }
  FilterParams params;
  params.n_hashes = static_cast<uint32_t>(GetLe(p + 6, 2));
  params.n_bits = GetLe(p + 8, 8);
  const uint64_t adds = GetLe(p + 16, 8);
  const uint64_t ones = GetLe(p + 24, 8);
  try {
    params.Validate();
  } catch (const std::invalid_argument &e) {
    throw SnapshotFormatError(std::string("bad snapshot parameters: ") + e.what());
  }
  const uint64_t bitmap_bytes = (params.n_bits + 7) / 8;
  if (bytes.size() - kSnapshotHeaderBytes != bitmap_bytes) {
    throw SnapshotFormatError(
        "snapshot bitmap has " + std::to_string(bytes.size() - kSnapshotHeaderBytes) +
        " bytes, expected " + std::to_string(bitmap_bytes));
  }

  CoverageFilter f(params);
  const uint8_t *bitmap = p + kSnapshotHeaderBytes;
  for (uint64_t w = 0; w < f.words(); ++w) {
    uint64_t v = 0;
    for (uint64_t b = 0; b < 8; ++b) {
      const uint64_t at = w * 8 + b;
      if (at < bitmap_bytes) v |= uint64_t{bitmap[at]} << (8 * b);
    }
    f.words_[w].store(v, std::memory_order_relaxed);
  }
  if (params.n_bits % 64 != 0) {
    const uint64_t valid = (uint64_t{1} << (params.n_bits % 64)) - 1;
    if (f.words_.back().load() & ~valid) {
      throw SnapshotFormatError("snapshot has bits set beyond n_bits");
    }
  }
  const uint64_t counted = f.PopcountScanSerial();
  if (counted != ones) {
    throw SnapshotFormatError("snapshot ones field " + std::to_string(ones) +
                              " disagrees with bitmap popcount " +
                              std::to_string(counted));
  }
  if (ones > adds * params.n_hashes) {
    throw SnapshotFormatError("snapshot ones exceeds n_hashes * adds");
  }
  f.ones_->store(ones);
  f.adds_->store(adds);
  return f;
}

bool CoverageFilter::IdenticalTo(const CoverageFilter &other) const {
  if (params_ != other.params_ || ones() != other.ones() || adds() != other.adds()) {
    return false;
  }
  for (size_t i = 0; i < words(); ++i) {
    if (words_[i].load(std::memory_order_relaxed) !=
        other.words_[i].load(std::memory_order_relaxed)) {
      return false;
    }
  }
  return true;
}

EstimateSpread SimulateEstimateSpread(const FilterParams &params, uint64_t n,
                                      int reps, uint64_t seed) {
  EstimateSpread spread{0, 0};
  std::mt19937_64 rng(seed);
  CoverageFilter f(params);
  for (int r = 0; r < reps; ++r) {
    f.Clear();
    for (uint64_t i = 0; i < n; ++i) f.Add(Digest{rng(), rng()});
    if (f.saturated() || n == 0) continue;
    const double rel = (f.Estimate() - static_cast<double>(n)) / static_cast<double>(n);
    if (r == 0) {
      spread = {rel, rel};
    } else {
      spread.min_rel_error = std::min(spread.min_rel_error, rel);
      spread.max_rel_error = std::max(spread.max_rel_error, rel);
    }
  }
  return spread;
}

}  // namespace lsc
