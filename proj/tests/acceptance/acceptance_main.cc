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

// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails. Tolerances are pinned below; nothing here is tuned to the
// observed numbers.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lsc/collector.h"
#include "lsc/collector_server.h"
#include "lsc/coverage_filter.h"
#include "lsc/frame.h"
#include "lsc/synth.h"

namespace lsc {
namespace {

using Clock = std::chrono::steady_clock;

// Pinned tolerances.
constexpr double kDeriveBitsTolerance = 0.01;
constexpr double kReferenceBits = 538e6;
constexpr uint32_t kExpectedHashes = 4;
constexpr double kAccuracyTolerance = 0.06;
constexpr int kAccuracyReps = 10;
constexpr uint64_t kLoopGridStates = 8;
constexpr uint64_t kNormalityBehaviors = 10'000;
constexpr uint64_t kCampaignExecs = 100'000;
constexpr double kCampaignTolerance = 0.05;
constexpr double kCampaignPeriodSec = 10;
constexpr double kMinFramesPerSec = 10'000;
constexpr double kThroughputSeconds = 60;
constexpr double kLatencyRatioLimit = 1.5;
constexpr uint64_t kFilterMemoryLimit = 80ull << 20;

struct Result {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char *format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

std::string TempPath(const std::string &name) {
  return (std::filesystem::temp_directory_path() /
          ("lsc-accept-" + std::to_string(::getpid()) + "-" + name))
      .string();
}

std::string Slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

uint64_t ResidentBytes() {
  std::ifstream in("/proc/self/status");
  std::string line;
  while (std::getline(in, line)) {
    if (line.starts_with("VmRSS:")) return std::stoull(line.substr(6)) * 1024;
  }
  return 0;
}

Result ParamDerivation() {
  const FilterParams p = DeriveParams(86'400'000, 0.05);
  const double rel = std::abs(static_cast<double>(p.n_bits) - kReferenceBits) / kReferenceBits;
  return {rel <= kDeriveBitsTolerance && p.n_hashes == kExpectedHashes,
          Fmt("n_bits=%llu (%.3f%% from 538e6, limit 1%%) n_hashes=%u (want 4)",
              static_cast<unsigned long long>(p.n_bits), rel * 100, p.n_hashes)};
}

Result EstimatorAccuracy() {
  const FilterParams params{uint64_t{1} << 20, 4};
  double worst = 0;
  for (int rep = 0; rep < kAccuracyReps; ++rep) {
    CoverageFilter filter(params);
    OracleSet exact;
    std::mt19937_64 rng(1000 + rep);
    while (filter.density() < 0.9) {
      const Digest d{rng(), rng()};
      if (exact.Add(d)) filter.Add(d);
    }
    const double truth = static_cast<double>(exact.count());
    worst = std::max(worst, std::abs(filter.Estimate() - truth) / truth);
  }
  return {worst <= kAccuracyTolerance,
          Fmt("2^20 bits, 4 hashes, 90%% density, %d reps: worst relative error %.3f%% (limit 6%%)",
              kAccuracyReps, worst * 100)};
}

Result LoopGridCollapse() {
  const GridCount k3 = CountLoopGrid(3);
  const GridCount k10 = CountLoopGrid(10);
  const bool pass = k3.distinct_states == kLoopGridStates && k3.hit_vectors == 64 &&
                    k10.distinct_states == kLoopGridStates && k10.hit_vectors == 1331;
  return {pass, Fmt("K=3: %llu vectors -> %llu states; K=10: %llu vectors -> %llu states (want 8)",
                    static_cast<unsigned long long>(k3.hit_vectors),
                    static_cast<unsigned long long>(k3.distinct_states),
                    static_cast<unsigned long long>(k10.hit_vectors),
                    static_cast<unsigned long long>(k10.distinct_states))};
}

Result NormalitySeparation() {
  WalkOptions walk;
  walk.arm_probability = 0.5;
  const NormalityReport r = CheckNormality(BuildUseAfterFreeCfg(), kNormalityBehaviors, 1, walk);
  const bool pass = r.Holds() && r.normal > 0 && r.abnormal > 0 && r.capped == 0;
  return {pass, Fmt("%llu behaviors: normal %llu/%llu with exit edge, abnormal %llu/%llu with "
                    "exit edge, %llu shared digests",
                    static_cast<unsigned long long>(kNormalityBehaviors),
                    static_cast<unsigned long long>(r.normal_with_exit_edge),
                    static_cast<unsigned long long>(r.normal),
                    static_cast<unsigned long long>(r.abnormal_with_exit_edge),
                    static_cast<unsigned long long>(r.abnormal),
                    static_cast<unsigned long long>(r.shared_digests))};
}

SynthCfg CampaignCfg() {
  RandomCfgParams p;
  p.n_blocks = 300;
  p.n_exits = 2;
  p.n_exceptions = 6;
  return RandomCfg(2026, p);
}

bool CsvWellFormed(const std::string &csv, size_t *rows_out) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) return false;
  size_t rows = 0;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string field;
    int n = 0;
    while (std::getline(fields, field, ',')) {
      char *end = nullptr;
      std::strtod(field.c_str(), &end);
      if (field.empty() || *end != '\0') return false;
      ++n;
    }
    if (n != 7) return false;
    ++rows;
  }
  *rows_out = rows;
  return rows > 0;
}

Result EndToEndCampaign() {
  // 1,000 executions per campaign second, compressed 25x: the 100 s campaign
  // takes about 4 s of wall time.
  constexpr double kCampaignRate = 1000;
  constexpr double kTimeScale = 25;
  const std::string endpoint = TempPath("e2e.sock");
  const std::string report = TempPath("e2e.csv");
  CollectorOptions copts;
  copts.period_sec = kCampaignPeriodSec;
  ServerOptions sopts;
  sopts.endpoint = endpoint;
  sopts.time_scale = kTimeScale;
  sopts.report_path = report;
  CollectorServer server(copts, sopts);
  std::thread run([&] { server.Run(); });

  CampaignResult result;
  {
    DatagramSink sink(endpoint);
    CampaignOptions opts;
    opts.seed = 7;
    opts.walk.arm_probability = 0.1;
    const auto start = Clock::now();
    opts.on_frame = [&](uint64_t sent) {
      if (sent % 64) return;
      std::this_thread::sleep_until(
          start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(
                      static_cast<double>(sent) / (kCampaignRate * kTimeScale))));
    };
    result = RunCampaign(CampaignCfg(), kCampaignExecs, sink, opts);
  }
  const auto deadline = Clock::now() + std::chrono::seconds(30);
  while (server.received() < result.emitted && Clock::now() < deadline) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  server.RequestStop();
  run.join();

  const std::vector<ReadoutRow> &rows = server.collector().rows();
  bool monotone = !rows.empty();
  for (size_t i = 1; i < rows.size(); ++i) {
    monotone &= rows[i].coverage >= rows[i - 1].coverage && rows[i].t_sec > rows[i - 1].t_sec;
  }
  const double final_cov = rows.empty() ? 0 : rows.back().coverage;
  const double exact = static_cast<double>(result.exact_distinct);
  const double rel = exact > 0 ? std::abs(final_cov - exact) / exact : 1;
  size_t csv_rows = 0;
  const bool csv_ok = CsvWellFormed(Slurp(report), &csv_rows) && csv_rows == rows.size();
  std::filesystem::remove(report);
  const bool pass = result.emitted == kCampaignExecs && !result.sink_failed &&
                    server.collector().execs() == kCampaignExecs && monotone &&
                    rel <= kCampaignTolerance && csv_ok && rows.size() >= 10;
  return {pass, Fmt("%llu execs, %zu rows every 10 s, monotone=%s, final %.1f vs exact %llu "
                    "(%.3f%%, limit 5%%), csv 7 columns=%s",
                    static_cast<unsigned long long>(server.collector().execs()), rows.size(),
                    monotone ? "yes" : "no", final_cov,
                    static_cast<unsigned long long>(result.exact_distinct), rel * 100,
                    csv_ok ? "yes" : "no")};
}

Result Throughput() {
  constexpr double kOfferedRate = 12'000;
  const std::string endpoint = TempPath("tput.sock");
  const uint64_t rss_before = ResidentBytes();

  CollectorOptions copts;  // default filter profile
  ServerOptions sopts;
  sopts.endpoint = endpoint;
  sopts.track_latency = true;
  CollectorServer server(copts, sopts);
  std::thread run([&] { server.Run(); });

  uint64_t sent = 0;
  const auto start = Clock::now();
  {
    DatagramSender tx(endpoint);
    std::mt19937_64 rng(12);
    const auto end = start + std::chrono::duration_cast<Clock::duration>(
                                 std::chrono::duration<double>(kThroughputSeconds));
    while (Clock::now() < end) {
      for (int i = 0; i < 64; ++i) {
        if (!tx.Send(EncodeFrame(ExecFrame{0, Digest{rng(), rng()}}))) break;
        ++sent;
      }
      std::this_thread::sleep_until(
          start + std::chrono::duration_cast<Clock::duration>(
                      std::chrono::duration<double>(static_cast<double>(sent) / kOfferedRate)));
    }
  }
  while (server.received() < sent) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
  const uint64_t rss_peak = ResidentBytes();
  server.RequestStop();
  run.join();

  const double rate = static_cast<double>(server.collector().execs()) / elapsed;
  const std::vector<LatencyBucket> &buckets = server.latency();
  auto window_mean = [&](size_t from, size_t to) {
    LatencyBucket sum;
    for (size_t i = from; i < std::min(to, buckets.size()); ++i) {
      sum.frames += buckets[i].frames;
      sum.total_ns += buckets[i].total_ns;
    }
    return sum.mean_ns();
  };
  const double first = window_mean(0, 10);
  const double last = window_mean(50, 60);
  const double ratio = first > 0 ? last / first : 0;
  const uint64_t footprint = server.collector().filter().FootprintBytes();
  const uint64_t rss_delta = rss_peak > rss_before ? rss_peak - rss_before : 0;
  const bool pass = elapsed >= kThroughputSeconds && rate >= kMinFramesPerSec && first > 0 &&
                    last > 0 && ratio <= kLatencyRatioLimit && footprint <= kFilterMemoryLimit &&
                    rss_delta <= kFilterMemoryLimit;
  return {pass, Fmt("%llu frames in %.1f s = %.0f frames/s (min 10000); ingest latency first 10 s "
                    "%.0f ns, last 10 s %.0f ns, ratio %.2f (max 1.5); filter %.1f MB, "
                    "resident growth %.1f MB (max 80 MB)",
                    static_cast<unsigned long long>(server.collector().execs()), elapsed, rate,
                    first, last, ratio, footprint / 1048576.0, rss_delta / 1048576.0)};
}

Result ReplayDeterminism() {
  const std::string trace = TempPath("replay.trace");
  {
    TraceFileSink sink(trace);
    CampaignOptions opts;
    opts.seed = 99;
    opts.walk.arm_probability = 0.1;
    RunCampaign(CampaignCfg(), 50'000, sink, opts);
  }
  const std::string a = TempPath("replay-a.json");
  const std::string b = TempPath("replay-b.json");
  // In process, through the library.
  for (const std::string &out : {a, b}) {
    Collector c(CollectorOptions{FilterParams{1 << 22, 4}, 10, false});
    ReplayTrace(c, ReadTraceFile(trace), ReplayOptions{});
    c.WriteReport(out, ReportFormat::kJson);
  }
  const std::string ja = Slurp(a);
  const bool lib_same = !ja.empty() && ja == Slurp(b);
  // And through the collector binary, as an operator would run it.
  const std::string ca = TempPath("replay-a.csv");
  const std::string cb = TempPath("replay-b.csv");
  bool cli_same = true;
  for (const std::string &out : {ca, cb}) {
    const std::string cmd = std::string(LSC_COLLECTOR_BIN) + " --replay " + trace + " --out " +
                            out + " --period 10 2>/dev/null";
    cli_same &= std::system(cmd.c_str()) == 0;
  }
  const std::string csv_a = Slurp(ca);
  cli_same &= !csv_a.empty() && csv_a == Slurp(cb);
  for (const std::string &p : {trace, a, b, ca, cb}) std::filesystem::remove(p);
  return {lib_same && cli_same,
          Fmt("50000-frame trace replayed twice: library JSON identical=%s, collector CLI CSV "
              "identical=%s",
              lib_same ? "yes" : "no", cli_same ? "yes" : "no")};
}

}  // namespace
}  // namespace lsc

int main() {
  struct Criterion {
    const char *name;
    std::function<lsc::Result()> run;
  };
  const Criterion criteria[] = {
      {"param-derivation", lsc::ParamDerivation},
      {"estimator-accuracy", lsc::EstimatorAccuracy},
      {"loop-grid-collapse", lsc::LoopGridCollapse},
      {"normality-separation", lsc::NormalitySeparation},
      {"end-to-end-campaign", lsc::EndToEndCampaign},
      {"throughput-and-memory", lsc::Throughput},
      {"replay-determinism", lsc::ReplayDeterminism},
  };
  int failed = 0;
  for (const Criterion &c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    lsc::Result r;
    try {
      r = c.run();
    } catch (const std::exception &e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s: %s [%.1f s]\n", r.pass ? "PASS" : "FAIL", c.name, r.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !r.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed,
              std::size(criteria));
  return failed ? 1 : 0;
}
