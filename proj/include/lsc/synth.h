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

// Synthetic programs as small control-flow graphs, walked to produce program
// behaviors with known logic states. Used as ground truth for the metric.
//
// Walk semantics:
//  * A walk starts at block 0 and records one edge per transition between
//    consecutive blocks: CombineEdge(id[from], id[to]). There is no entry
//    pseudo-edge, so a walk that stops in block 0 has an empty state.
//  * On entering a block, its exceptions are checked first. An armed
//    exception whose `requires_visited` block (if any) was visited earlier
//    ends the walk as abnormal.
//  * Entering an exit block ends the walk as normal. The edge into it is an
//    exit edge.
//  * Otherwise the block's branch picks `taken` or `fallthrough`. A branch
//    with taken == fallthrough is unconditional and consumes no decision.

#ifndef LSC_SYNTH_H_
#define LSC_SYNTH_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lsc/channel.h"
#include "lsc/coverage_filter.h"
#include "lsc/frame.h"
#include "lsc/logic_state.h"

namespace lsc {

struct SynthCfg {
  struct Branch {
    uint32_t source = 0;
    uint32_t taken = 0;
    uint32_t fallthrough = 0;
    bool conditional() const { return taken != fallthrough; }
  };
  struct Exception {
    uint32_t block = 0;
    std::optional<uint32_t> requires_visited;
  };

  std::vector<BlockId> blocks;  // index 0 is the entry
  std::vector<Branch> branches;
  std::vector<uint32_t> exit_blocks;
  std::vector<Exception> exceptions;

  // Throws std::invalid_argument if: no blocks or no exit block; a branch
  // references a missing block; a block has two branches; a non-exit block
  // has no branch or an exit block has one; an exception sits on an exit
  // block; or two distinct edges of the graph share an EdgeId.
  void Validate() const;

  bool IsExit(uint32_t block) const;
  // Index into `branches` for `block`, or -1.
  int BranchOf(uint32_t block) const;
  EdgeId Edge(uint32_t from, uint32_t to) const {
    return CombineEdge(blocks[from], blocks[to]);
  }
  // Every edge that enters an exit block.
  std::set<uint32_t> ExitEdges() const;
};

enum class Outcome { kNormal, kAbnormal, kCapped };

struct SynthBehavior {
  std::vector<EdgeId> edge_sequence;
  // Decisions consumed by conditional branches, in order (true = taken).
  std::vector<bool> decisions;
  // Hit count m(b) per edge.
  std::map<uint32_t, uint32_t> hit_counts;
  Outcome outcome = Outcome::kNormal;

  LogicState State() const { return LogicState::FromEdges(edge_sequence); }
};

struct WalkOptions {
  // Walks longer than this are discarded as non-terminating.
  uint32_t max_edges = 10000;
  double taken_probability = 0.5;
  // Per-behavior probability that each exception is armed.
  double arm_probability = 0.0;
};

// Pseudo-random walk driven entirely by `input_seed`.
SynthBehavior RunBehavior(const SynthCfg &cfg, uint64_t input_seed,
                          const WalkOptions &options = {});

// Walk with explicit decisions; once they run out every branch falls
// through. `armed[i]` arms exception i (missing entries are unarmed).
SynthBehavior RunScripted(const SynthCfg &cfg, const std::vector<bool> &decisions,
                          const std::vector<bool> &armed,
                          uint32_t max_edges = 10000);

// Three independent loops; loop i is entered through branch b_i. Blocks:
// entry, (head_i, body_i) x 3, exit.
SynthCfg BuildThreeLoopCfg();
// Block indices of the loop heads/bodies in BuildThreeLoopCfg().
inline constexpr uint32_t kLoopHeads[3] = {1, 3, 5};
inline constexpr uint32_t kLoopBodies[3] = {2, 4, 6};
// Decision script giving m(b_i) = hits[i].
std::vector<bool> LoopDecisions(uint32_t m1, uint32_t m2, uint32_t m3);

// Use-after-free shape: entry -> cond(free?) -> [free] -> join -> loop ->
// use(*q) -> tail -> exit. The exception sits on `use` and needs `free` to
// have run; the exit branch b_x is tail -> exit.
SynthCfg BuildUseAfterFreeCfg();
inline constexpr uint32_t kUafFreeBlock = 2;
inline constexpr uint32_t kUafUseBlock = 6;
inline constexpr uint32_t kUafTailBlock = 7;
inline constexpr uint32_t kUafExitBlock = 8;

// n blocks in a chain, last one is the exit.
SynthCfg BuildStraightLineCfg(uint32_t n_blocks, uint64_t seed = 1);

struct RandomCfgParams {
  uint32_t n_blocks = 30;
  uint32_t n_exits = 1;
  uint32_t n_exceptions = 0;
  double back_edge_probability = 0.3;

  static constexpr uint32_t kMaxBlocks = 1u << 16;
};

// Deterministic in `seed`. Exits are the last n_exits blocks; every
// fallthrough points forward so an exit is always reachable. Throws
// std::invalid_argument unless 1 <= n_blocks <= kMaxBlocks, n_exits >= 1,
// the entry is not an exit (for n_blocks > 1), and exceptions fit on the
// non-exit blocks.
SynthCfg RandomCfg(uint64_t seed, const RandomCfgParams &params);

// Distinct states reached by every walk of at most `max_edges` edges, over
// all decision sequences and all arming combinations. Capped walks are not
// included.
std::set<LogicState> EnumerateWalkStates(const SynthCfg &cfg, uint32_t max_edges);

struct GridCount {
  uint64_t distinct_states = 0;
  uint64_t hit_vectors = 0;
};
// All behaviors of BuildThreeLoopCfg() with m(b_i) in {0..k}. The parallel
// version splits the grid with OpenMP; the serial one is its reference.
GridCount CountLoopGrid(uint32_t k);
GridCount CountLoopGridSerial(uint32_t k);

// Normality separation over `behaviors` random walks: counts how many
// normal states carry an exit edge, how many abnormal ones do, and how many
// digests appear on both sides.
struct NormalityReport {
  uint64_t normal = 0;
  uint64_t abnormal = 0;
  uint64_t capped = 0;
  uint64_t normal_with_exit_edge = 0;
  uint64_t abnormal_with_exit_edge = 0;
  uint64_t shared_digests = 0;

  bool Holds() const {
    return normal_with_exit_edge == normal && abnormal_with_exit_edge == 0 &&
           shared_digests == 0;
  }
};
NormalityReport CheckNormality(const SynthCfg &cfg, uint64_t behaviors,
                               uint64_t seed, const WalkOptions &options);

// Outcome and digest of one walk.
struct WalkDigest {
  Digest digest;
  Outcome outcome = Outcome::kNormal;
};

// Seed used for the i-th behavior of a campaign.
uint64_t BehaviorSeed(uint64_t campaign_seed, uint64_t index);

// Walks behaviors first .. first+count-1 of a campaign. OpenMP-parallel over
// behaviors; WalkDigestsSerial() is the single-threaded reference and both
// return identical vectors.
std::vector<WalkDigest> WalkDigests(const SynthCfg &cfg, uint64_t campaign_seed,
                                    uint64_t first, uint64_t count,
                                    const WalkOptions &options);
std::vector<WalkDigest> WalkDigestsSerial(const SynthCfg &cfg, uint64_t campaign_seed,
                                          uint64_t first, uint64_t count,
                                          const WalkOptions &options);

class FrameSink {
 public:
  virtual ~FrameSink() = default;
  virtual bool Send(const ExecFrame &frame) = 0;
  virtual void Flush() {}
};

class TraceFileSink : public FrameSink {
 public:
  explicit TraceFileSink(const std::string &path) : writer_(path) {}
  bool Send(const ExecFrame &frame) override { return writer_.Write(frame); }
  void Flush() override { writer_.Flush(); }

 private:
  TraceWriter writer_;
};

class DatagramSink : public FrameSink {
 public:
  explicit DatagramSink(const std::string &endpoint) : sender_(endpoint) {}
  bool Send(const ExecFrame &frame) override;

 private:
  DatagramSender sender_;
};

// "path.trace" style sinks write a trace file; a path that names a bound
// socket (or "socket:" prefix) streams datagrams.
std::unique_ptr<FrameSink> OpenSink(const std::string &spec);

struct CampaignOptions {
  uint64_t seed = 1;
  WalkOptions walk;
  // Behaviors walked per parallel batch.
  uint64_t batch = 4096;
  // Called after each frame is sent, with the number sent so far. Used to
  // pace live campaigns.
  std::function<void(uint64_t)> on_frame;
};

struct CampaignResult {
  uint64_t emitted = 0;
  uint64_t exact_distinct = 0;
  uint64_t abnormal = 0;
  uint64_t discarded = 0;
  bool sink_failed = false;
};

// Emits `n_execs` frames (capped walks are discarded and replaced by the
// next seed) and tracks the exact distinct count. Stops early with
// sink_failed if the sink rejects a frame.
CampaignResult RunCampaign(const SynthCfg &cfg, uint64_t n_execs, FrameSink &sink,
                           const CampaignOptions &options);

}  // namespace lsc

#endif  // LSC_SYNTH_H_
