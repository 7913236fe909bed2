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

// Synthetic-program driver.
//
//   synth loop-grid-check [--k-max 10]
//   synth normality-check [--behaviors 10000] [--seed 1]
//   synth campaign --seed S --execs N --cfg-size B --sink <file|socket>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "lsc/synth.h"

namespace {

int LoopGridCheck(uint32_t k_max) {
  bool ok = true;
  for (uint32_t k = 1; k <= k_max; ++k) {
    const lsc::GridCount c = lsc::CountLoopGrid(k);
    std::printf("K=%-3u hit-count vectors=%-6llu distinct logic states=%llu\n", k,
                static_cast<unsigned long long>(c.hit_vectors),
                static_cast<unsigned long long>(c.distinct_states));
    ok &= c.distinct_states == 8;
  }
  std::printf("%s\n", ok ? "OK: state count constant at 8" : "FAIL");
  return ok ? 0 : 1;
}

int NormalityCheck(uint64_t behaviors, uint64_t seed, double arm_probability) {
  lsc::WalkOptions walk;
  walk.arm_probability = arm_probability;
  const lsc::NormalityReport r =
      lsc::CheckNormality(lsc::BuildUseAfterFreeCfg(), behaviors, seed, walk);
  std::printf("normal=%llu (with exit edge %llu) abnormal=%llu (with exit edge %llu) "
              "capped=%llu shared digests=%llu\n",
              static_cast<unsigned long long>(r.normal),
              static_cast<unsigned long long>(r.normal_with_exit_edge),
              static_cast<unsigned long long>(r.abnormal),
              static_cast<unsigned long long>(r.abnormal_with_exit_edge),
              static_cast<unsigned long long>(r.capped),
              static_cast<unsigned long long>(r.shared_digests));
  std::printf("%s\n", r.Holds() ? "OK: normal and abnormal states separated" : "FAIL");
  return r.Holds() ? 0 : 1;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Synthetic program behaviors for logic state coverage"};
  app.require_subcommand(1);

  uint32_t k_max = 10;
  auto *loop_grid = app.add_subcommand("loop-grid-check", "Hit-count grid collapse on the three-loop graph");
  loop_grid->add_option("--k-max", k_max, "Largest grid bound K to check")->check(CLI::Range(1, 64));

  uint64_t behaviors = 10000;
  uint64_t normality_seed = 1;
  double arm = 0.5;
  auto *normality = app.add_subcommand("normality-check", "Normal/abnormal separation on the use-after-free graph");
  normality->add_option("--behaviors", behaviors, "Random behaviors to walk");
  normality->add_option("--seed", normality_seed, "Seed");
  normality->add_option("--arm-probability", arm, "Probability the exception is armed")
      ->check(CLI::Range(0.0, 1.0));

  uint64_t seed = 1;
  uint64_t execs = 100000;
  uint32_t cfg_size = 30;
  uint32_t exits = 1;
  uint32_t exceptions = 0;
  double back_edge = 0.3;
  double campaign_arm = 0.1;
  uint32_t walk_cap = 10000;
  double rate = 0;
  std::string sink_spec;
  auto *campaign = app.add_subcommand("campaign", "Emit a synthetic campaign as frames");
  campaign->add_option("--seed", seed, "Campaign seed (also seeds the cfg)");
  campaign->add_option("--execs", execs, "Executions to emit");
  campaign->add_option("--cfg-size", cfg_size, "Blocks in the random cfg")
      ->check(CLI::Range(1u, lsc::RandomCfgParams::kMaxBlocks));
  campaign->add_option("--exits", exits, "Exit blocks");
  campaign->add_option("--exceptions", exceptions, "Exception points");
  campaign->add_option("--back-edge", back_edge, "Probability a taken edge loops back")
      ->check(CLI::Range(0.0, 1.0));
  campaign->add_option("--arm-probability", campaign_arm, "Per-exception arming probability")
      ->check(CLI::Range(0.0, 1.0));
  campaign->add_option("--walk-cap", walk_cap, "Walk-length cap in edges");
  campaign->add_option("--rate", rate, "Pace to this many frames per second (0 = unpaced)");
  campaign->add_option("--sink", sink_spec,
                       "Trace file path, or a collector socket path (prefix with socket: to force)")
      ->required();

  CLI11_PARSE(app, argc, argv);

  if (*loop_grid) return LoopGridCheck(k_max);
  if (*normality) return NormalityCheck(behaviors, normality_seed, arm);

  try {
    lsc::RandomCfgParams params;
    params.n_blocks = cfg_size;
    params.n_exits = exits;
    params.n_exceptions = exceptions;
    params.back_edge_probability = back_edge;
    const lsc::SynthCfg cfg = lsc::RandomCfg(seed, params);

    std::unique_ptr<lsc::FrameSink> sink = lsc::OpenSink(sink_spec);
    lsc::CampaignOptions options;
    options.seed = seed;
    options.walk.max_edges = walk_cap;
    options.walk.arm_probability = campaign_arm;
    const auto start = std::chrono::steady_clock::now();
    if (rate > 0) {
      options.on_frame = [&](uint64_t sent) {
        if (sent % 64 != 0) return;
        const auto due = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                     std::chrono::duration<double>(static_cast<double>(sent) / rate));
        std::this_thread::sleep_until(due);
      };
    }
    const lsc::CampaignResult r = lsc::RunCampaign(cfg, execs, *sink, options);
    nlohmann::ordered_json summary = {{"emitted", r.emitted},
                                      {"exact_distinct", r.exact_distinct},
                                      {"abnormal", r.abnormal},
                                      {"discarded", r.discarded},
                                      {"sink_failed", r.sink_failed}};
    std::cout << summary.dump() << "\n";
    if (r.sink_failed) {
      std::cerr << "synth: sink stopped accepting frames after " << r.emitted
                << " of " << execs << "\n";
      return 1;
    }
    return 0;
  } catch (const std::exception &e) {
    std::cerr << "synth: " << e.what() << "\n";
    return 1;
  }
}
