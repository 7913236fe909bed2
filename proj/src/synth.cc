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

#include "lsc/synth.h"

#include <sys/stat.h>

#include <algorithm>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace lsc {
namespace {

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementations.
double Unit(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

uint32_t Below(std::mt19937_64 &rng, uint32_t n) {
  return static_cast<uint32_t>(rng() % n);
}

// Assigns block ids from `seed`, redrawing until the graph validates (ids
// distinct, no EdgeId shared by two edges).
void AssignBlockIds(SynthCfg &cfg, size_t n_blocks, uint64_t seed) {
  for (uint64_t attempt = 0;; ++attempt) {
    cfg.blocks.clear();
    std::unordered_set<uint32_t> used;
    for (size_t i = 0; cfg.blocks.size() < n_blocks; ++i) {
      const auto id = static_cast<uint32_t>(SplitMix64(seed ^ (attempt << 40) ^ (i * 0x100000001ULL)));
      if (id == 0 || !used.insert(id).second) continue;
      cfg.blocks.push_back(BlockId{id});
    }
    try {
      cfg.Validate();
      return;
    } catch (const std::invalid_argument &) {
      if (attempt > 64) throw;
    }
  }
}

// Shared walker. `decide()` is asked for each conditional branch.
template <typename Decide>
SynthBehavior Walk(const SynthCfg &cfg, const std::vector<bool> &armed,
                   uint32_t max_edges, Decide &&decide) {
  SynthBehavior b;
  std::vector<bool> visited(cfg.blocks.size(), false);
  uint32_t cur = 0;
  for (;;) {
    for (size_t i = 0; i < cfg.exceptions.size(); ++i) {
      const SynthCfg::Exception &e = cfg.exceptions[i];
      if (e.block != cur || i >= armed.size() || !armed[i]) continue;
      if (!e.requires_visited || visited[*e.requires_visited]) {
        b.outcome = Outcome::kAbnormal;
        return b;
      }
    }
    visited[cur] = true;
    if (cfg.IsExit(cur)) {
      b.outcome = Outcome::kNormal;
      return b;
    }
    const SynthCfg::Branch &br = cfg.branches[cfg.BranchOf(cur)];
    uint32_t next = br.taken;
    if (br.conditional()) {
      const bool taken = decide();
      b.decisions.push_back(taken);
      next = taken ? br.taken : br.fallthrough;
    }
    if (b.edge_sequence.size() >= max_edges) {
      b.outcome = Outcome::kCapped;
      return b;
    }
    const EdgeId e = cfg.Edge(cur, next);
    b.edge_sequence.push_back(e);
    ++b.hit_counts[e.value];
    cur = next;
  }
}

// Lightweight walk for bulk digesting: no hit counts or decision log.
WalkDigest WalkToDigest(const SynthCfg &cfg, const std::vector<int> &branch_of,
                        uint64_t input_seed, const WalkOptions &options) {
  std::mt19937_64 rng(input_seed);
  std::vector<bool> armed(cfg.exceptions.size());
  for (size_t i = 0; i < armed.size(); ++i) armed[i] = Unit(rng) < options.arm_probability;
  std::vector<bool> visited(cfg.blocks.size(), false);
  std::vector<EdgeId> edges;
  uint32_t cur = 0;
  WalkDigest out;
  for (;;) {
    bool crashed = false;
    for (size_t i = 0; i < cfg.exceptions.size() && !crashed; ++i) {
      const SynthCfg::Exception &e = cfg.exceptions[i];
      if (e.block == cur && armed[i] &&
          (!e.requires_visited || visited[*e.requires_visited])) {
        crashed = true;
      }
    }
    if (crashed) {
      out.outcome = Outcome::kAbnormal;
      break;
    }
    visited[cur] = true;
    if (cfg.IsExit(cur)) {
      out.outcome = Outcome::kNormal;
      break;
    }
    const SynthCfg::Branch &br = cfg.branches[branch_of[cur]];
    uint32_t next = br.taken;
    if (br.conditional()) next = Unit(rng) < options.taken_probability ? br.taken : br.fallthrough;
    if (edges.size() >= options.max_edges) {
      out.outcome = Outcome::kCapped;
      return out;
    }
    edges.push_back(cfg.Edge(cur, next));
    cur = next;
  }
  out.digest = DigestOf(LogicState::FromEdges(edges));
  return out;
}

std::vector<int> BranchTable(const SynthCfg &cfg) {
  std::vector<int> table(cfg.blocks.size(), -1);
  for (size_t i = 0; i < cfg.branches.size(); ++i) {
    table[cfg.branches[i].source] = static_cast<int>(i);
  }
  return table;
}

}  // namespace

void SynthCfg::Validate() const {
  const size_t n = blocks.size();
  if (n == 0) throw std::invalid_argument("cfg has no blocks");
  if (exit_blocks.empty()) throw std::invalid_argument("cfg has no exit block");
  std::vector<int> exits(n, 0);
  for (uint32_t x : exit_blocks) {
    if (x >= n) throw std::invalid_argument("exit block out of range");
    exits[x] = 1;
  }
  std::vector<int> branch_count(n, 0);
  for (const Branch &br : branches) {
    if (br.source >= n || br.taken >= n || br.fallthrough >= n) {
      throw std::invalid_argument("branch references a missing block");
    }
    if (++branch_count[br.source] > 1) {
      throw std::invalid_argument("block has more than one branch");
    }
  }
  for (size_t i = 0; i < n; ++i) {
    if (exits[i] && branch_count[i]) throw std::invalid_argument("exit block has a branch");
    if (!exits[i] && !branch_count[i]) throw std::invalid_argument("non-exit block has no branch");
  }
  for (const Exception &e : exceptions) {
    if (e.block >= n || (e.requires_visited && *e.requires_visited >= n)) {
      throw std::invalid_argument("exception references a missing block");
    }
    if (exits[e.block]) throw std::invalid_argument("exception placed on an exit block");
  }
  std::unordered_map<uint32_t, std::pair<uint32_t, uint32_t>> seen;
  auto check = [&](uint32_t from, uint32_t to) {
    const uint32_t id = Edge(from, to).value;
    auto [it, inserted] = seen.try_emplace(id, from, to);
    if (!inserted && it->second != std::pair(from, to)) {
      throw std::invalid_argument("two edges share an EdgeId");
    }
  };
  for (const Branch &br : branches) {
    check(br.source, br.taken);
    check(br.source, br.fallthrough);
  }
}

bool SynthCfg::IsExit(uint32_t block) const {
  return std::find(exit_blocks.begin(), exit_blocks.end(), block) != exit_blocks.end();
}

int SynthCfg::BranchOf(uint32_t block) const {
  for (size_t i = 0; i < branches.size(); ++i) {
    if (branches[i].source == block) return static_cast<int>(i);
  }
  return -1;
}

std::set<uint32_t> SynthCfg::ExitEdges() const {
  std::set<uint32_t> out;
  for (const Branch &br : branches) {
    if (IsExit(br.taken)) out.insert(Edge(br.source, br.taken).value);
    if (IsExit(br.fallthrough)) out.insert(Edge(br.source, br.fallthrough).value);
  }
  return out;
}

SynthBehavior RunBehavior(const SynthCfg &cfg, uint64_t input_seed,
                          const WalkOptions &options) {
  std::mt19937_64 rng(input_seed);
  std::vector<bool> armed(cfg.exceptions.size());
  for (size_t i = 0; i < armed.size(); ++i) armed[i] = Unit(rng) < options.arm_probability;
  return Walk(cfg, armed, options.max_edges,
              [&] { return Unit(rng) < options.taken_probability; });
}

SynthBehavior RunScripted(const SynthCfg &cfg, const std::vector<bool> &decisions,
                          const std::vector<bool> &armed, uint32_t max_edges) {
  size_t next = 0;
  return Walk(cfg, armed, max_edges,
              [&] { return next < decisions.size() ? decisions[next++] : false; });
}

SynthCfg BuildThreeLoopCfg() {
  SynthCfg cfg;
  cfg.branches = {
      {0, 1, 1},  // entry -> head1
      {1, 2, 3},  // head1: b1 into body1, else head2
      {2, 1, 1},  // body1 -> head1
      {3, 4, 5},  // head2: b2
      {4, 3, 3},
      {5, 6, 7},  // head3: b3, else exit
      {6, 5, 5},
  };
  cfg.exit_blocks = {7};
  AssignBlockIds(cfg, 8, 0xF162);
  return cfg;
}

std::vector<bool> LoopDecisions(uint32_t m1, uint32_t m2, uint32_t m3) {
  std::vector<bool> d;
  for (uint32_t m : {m1, m2, m3}) {
    d.insert(d.end(), m, true);
    d.push_back(false);
  }
  return d;
}

SynthCfg BuildUseAfterFreeCfg() {
  SynthCfg cfg;
  cfg.branches = {
      {0, 1, 1},  // entry: p = malloc()
      {1, 2, 3},  // if (c) free(p)
      {2, 3, 3},  // free -> join
      {3, 4, 4},  // join: q = p
      {4, 5, 6},  // loop head
      {5, 4, 4},  // loop body
      {6, 7, 7},  // use: *q
      {7, 8, 8},  // tail -> exit (b_x)
  };
  cfg.exit_blocks = {kUafExitBlock};
  cfg.exceptions = {{kUafUseBlock, kUafFreeBlock}};
  AssignBlockIds(cfg, 9, 0xF163);
  return cfg;
}

SynthCfg BuildStraightLineCfg(uint32_t n_blocks, uint64_t seed) {
  if (n_blocks == 0) throw std::invalid_argument("straight-line cfg needs a block");
  SynthCfg cfg;
  for (uint32_t i = 0; i + 1 < n_blocks; ++i) cfg.branches.push_back({i, i + 1, i + 1});
  cfg.exit_blocks = {n_blocks - 1};
  AssignBlockIds(cfg, n_blocks, seed);
  return cfg;
}

SynthCfg RandomCfg(uint64_t seed, const RandomCfgParams &params) {
  const uint32_t n = params.n_blocks;
  if (n < 1 || n > RandomCfgParams::kMaxBlocks) {
    throw std::invalid_argument("n_blocks must be in [1, 65536]");
  }
  if (params.n_exits < 1 || params.n_exits > n || (n > 1 && params.n_exits >= n)) {
    throw std::invalid_argument("cannot place exit blocks: need 1 <= n_exits < n_blocks");
  }
  const uint32_t inner = n - params.n_exits;
  if (params.n_exceptions > inner) {
    throw std::invalid_argument("more exceptions than non-exit blocks");
  }
  if (!(params.back_edge_probability >= 0 && params.back_edge_probability <= 1)) {
    throw std::invalid_argument("back_edge_probability must lie in [0, 1]");
  }

  std::mt19937_64 rng(seed);
  SynthCfg cfg;
  for (uint32_t i = 0; i < inner; ++i) {
    const uint32_t fall = i + 1 + Below(rng, n - i - 1);
    uint32_t taken;
    if (Unit(rng) < params.back_edge_probability) {
      taken = Below(rng, i + 1);
    } else {
      taken = i + 1 + Below(rng, n - i - 1);
    }
    cfg.branches.push_back({i, taken, fall});
  }
  for (uint32_t i = inner; i < n; ++i) cfg.exit_blocks.push_back(i);
  std::vector<uint32_t> candidates(inner);
  for (uint32_t i = 0; i < inner; ++i) candidates[i] = i;
  for (uint32_t k = 0; k < params.n_exceptions; ++k) {
    const uint32_t pick = k + Below(rng, inner - k);
    std::swap(candidates[k], candidates[pick]);
    cfg.exceptions.push_back({candidates[k], std::nullopt});
  }
  AssignBlockIds(cfg, n, rng());
  return cfg;
}

std::set<LogicState> EnumerateWalkStates(const SynthCfg &cfg, uint32_t max_edges) {
  cfg.Validate();
  std::set<LogicState> states;
  const size_t n_ex = cfg.exceptions.size();
  if (n_ex > 16) throw std::invalid_argument("too many exceptions to enumerate");
  for (uint64_t mask = 0; mask < (uint64_t{1} << n_ex); ++mask) {
    std::vector<bool> armed(n_ex);
    for (size_t i = 0; i < n_ex; ++i) armed[i] = (mask >> i) & 1;
    // Depth-first over decision prefixes: extend a prefix only if the walk
    // actually asked for more decisions than it was given.
    std::vector<std::vector<bool>> stack{{}};
    while (!stack.empty()) {
      std::vector<bool> prefix = std::move(stack.back());
      stack.pop_back();
      size_t used = 0;
      bool wanted_more = false;
      SynthBehavior b = Walk(cfg, armed, max_edges, [&] {
        if (used < prefix.size()) return static_cast<bool>(prefix[used++]);
        wanted_more = true;
        return false;
      });
      if (wanted_more) {
        // Both continuations of the first undecided branch.
        std::vector<bool> t = prefix;
        t.push_back(true);
        std::vector<bool> f = prefix;
        f.push_back(false);
        stack.push_back(std::move(t));
        stack.push_back(std::move(f));
        continue;
      }
      if (b.outcome != Outcome::kCapped) states.insert(b.State());
    }
  }
  return states;
}

GridCount CountLoopGridSerial(uint32_t k) {
  const SynthCfg cfg = BuildThreeLoopCfg();
  std::set<Digest> digests;
  GridCount out;
  for (uint32_t a = 0; a <= k; ++a) {
    for (uint32_t b = 0; b <= k; ++b) {
      for (uint32_t c = 0; c <= k; ++c) {
        const std::vector<bool> d = LoopDecisions(a, b, c);
        digests.insert(DigestOf(RunScripted(cfg, d, {}).State()));
        ++out.hit_vectors;
      }
    }
  }
  out.distinct_states = digests.size();
  return out;
}

GridCount CountLoopGrid(uint32_t k) {
  const SynthCfg cfg = BuildThreeLoopCfg();
  const int64_t side = static_cast<int64_t>(k) + 1;
  const int64_t cells = side * side * side;
  std::vector<Digest> digests(static_cast<size_t>(cells));
#pragma omp parallel for schedule(dynamic, 16)
  for (int64_t i = 0; i < cells; ++i) {
    const auto a = static_cast<uint32_t>(i / (side * side));
    const auto b = static_cast<uint32_t>((i / side) % side);
    const auto c = static_cast<uint32_t>(i % side);
    const std::vector<bool> d = LoopDecisions(a, b, c);
    digests[static_cast<size_t>(i)] = DigestOf(RunScripted(cfg, d, {}).State());
  }
  std::sort(digests.begin(), digests.end());
  GridCount out;
  out.hit_vectors = static_cast<uint64_t>(cells);
  out.distinct_states = static_cast<uint64_t>(
      std::unique(digests.begin(), digests.end()) - digests.begin());
  return out;
}

NormalityReport CheckNormality(const SynthCfg &cfg, uint64_t behaviors,
                               uint64_t seed, const WalkOptions &options) {
  const std::set<uint32_t> exit_edges = cfg.ExitEdges();
  NormalityReport report;
  std::set<Digest> normal_digests;
  std::set<Digest> abnormal_digests;
  for (uint64_t i = 0; i < behaviors; ++i) {
    const SynthBehavior b = RunBehavior(cfg, BehaviorSeed(seed, i), options);
    if (b.outcome == Outcome::kCapped) {
      ++report.capped;
      continue;
    }
    const LogicState state = b.State();
    const bool has_exit = std::any_of(state.edges().begin(), state.edges().end(),
                                      [&](uint32_t e) { return exit_edges.contains(e); });
    if (b.outcome == Outcome::kNormal) {
      ++report.normal;
      report.normal_with_exit_edge += has_exit;
      normal_digests.insert(DigestOf(state));
    } else {
      ++report.abnormal;
      report.abnormal_with_exit_edge += has_exit;
      abnormal_digests.insert(DigestOf(state));
    }
  }
  for (const Digest &d : abnormal_digests) report.shared_digests += normal_digests.contains(d);
  return report;
}

uint64_t BehaviorSeed(uint64_t campaign_seed, uint64_t index) {
  return SplitMix64(SplitMix64(campaign_seed) ^ index);
}

std::vector<WalkDigest> WalkDigests(const SynthCfg &cfg, uint64_t campaign_seed,
                                    uint64_t first, uint64_t count,
                                    const WalkOptions &options) {
  const std::vector<int> table = BranchTable(cfg);
  std::vector<WalkDigest> out(count);
  const auto n = static_cast<int64_t>(count);
#pragma omp parallel for schedule(dynamic, 64)
  for (int64_t i = 0; i < n; ++i) {
    out[static_cast<size_t>(i)] =
        WalkToDigest(cfg, table, BehaviorSeed(campaign_seed, first + static_cast<uint64_t>(i)), options);
  }
  return out;
}

std::vector<WalkDigest> WalkDigestsSerial(const SynthCfg &cfg, uint64_t campaign_seed,
                                          uint64_t first, uint64_t count,
                                          const WalkOptions &options) {
  std::vector<WalkDigest> out;
  out.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    const SynthBehavior b = RunBehavior(cfg, BehaviorSeed(campaign_seed, first + i), options);
    WalkDigest w;
    w.outcome = b.outcome;
    if (b.outcome != Outcome::kCapped) w.digest = DigestOf(b.State());
    out.push_back(w);
  }
  return out;
}

bool DatagramSink::Send(const ExecFrame &frame) {
  const FrameBytes bytes = EncodeFrame(frame);
  return sender_.Send(bytes);
}

std::unique_ptr<FrameSink> OpenSink(const std::string &spec) {
  constexpr std::string_view kSocketPrefix = "socket:";
  if (spec.starts_with(kSocketPrefix)) {
    return std::make_unique<DatagramSink>(spec.substr(kSocketPrefix.size()));
  }
  struct stat st{};
  if (::stat(spec.c_str(), &st) == 0 && S_ISSOCK(st.st_mode)) {
    return std::make_unique<DatagramSink>(spec);
  }
  return std::make_unique<TraceFileSink>(spec);
}

CampaignResult RunCampaign(const SynthCfg &cfg, uint64_t n_execs, FrameSink &sink,
                           const CampaignOptions &options) {
  cfg.Validate();
  CampaignResult result;
  OracleSet exact;
  const uint64_t batch = std::max<uint64_t>(1, options.batch);
  uint64_t next_seed = 0;
  while (result.emitted < n_execs) {
    const std::vector<WalkDigest> walks =
        WalkDigests(cfg, options.seed, next_seed, batch, options.walk);
    next_seed += batch;
    for (const WalkDigest &w : walks) {
      if (result.emitted >= n_execs) break;
      if (w.outcome == Outcome::kCapped) {
        ++result.discarded;
        continue;
      }
      ExecFrame frame;
      frame.digest = w.digest;
      if (w.outcome == Outcome::kAbnormal) frame.flags |= kFlagAbnormal;
      if (!sink.Send(frame)) {
        result.sink_failed = true;
        result.exact_distinct = exact.count();
        sink.Flush();
        return result;
      }
      exact.Add(w.digest);
      ++result.emitted;
      if (w.outcome == Outcome::kAbnormal) ++result.abnormal;
      if (options.on_frame) options.on_frame(result.emitted);
    }
    // Every walk of a batch capped: the cfg cannot terminate within the cap.
    if (result.discarded >= next_seed && next_seed >= 16 * batch) {
      throw std::runtime_error("synthetic campaign: every walk exceeds the walk-length cap");
    }
  }
  sink.Flush();
  result.exact_distinct = exact.count();
  return result;
}

}  // namespace lsc
