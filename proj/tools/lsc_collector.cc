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

// Logic state coverage collector. Launch before the campaign; producers send
// one frame per execution to the endpoint (also exported to them through
// $LSC_ENDPOINT). SIGINT/SIGTERM flush the final row, snapshot and report.
//
//   lsc-collector --endpoint /tmp/lsc.sock --out cov.csv --snapshot cov.lscf
//   lsc-collector --replay run.trace --out cov.csv          # virtual time

#include <csignal>
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "lsc/collector.h"
#include "lsc/collector_server.h"

namespace {

std::atomic<bool> g_stop{false};

extern "C" void HandleStop(int) { g_stop.store(true); }

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Logic state coverage collector"};

  std::string endpoint;
  uint64_t n_e = 0;
  double epsilon = 0.05;
  uint64_t n_bits = 0;
  uint32_t n_hashes = 0;
  double period = 10.0;
  std::string out;
  std::string format;
  std::string snapshot;
  double snapshot_period = 0;
  std::string replay;
  double replay_rate = 1000.0;
  std::string resume;
  int64_t skip = -1;
  bool exact_oracle = false;
  double time_scale = 1.0;
  double duration = 0;

  app.add_option("--endpoint", endpoint,
                 "Unix datagram socket path (default: $LSC_ENDPOINT or /tmp/lsc-collector.sock)");
  auto *n_e_opt = app.add_option("--n-e", n_e, "Expected distinct logic states")
                      ->check(CLI::PositiveNumber);
  auto *eps_opt = app.add_option("--epsilon", epsilon, "Target false positive rate")
                      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--n-bits", n_bits, "Filter size in bits (overrides derivation)");
  app.add_option("--n-hashes", n_hashes, "Hash count (overrides derivation)");
  app.add_option("--period", period, "Readout period in campaign seconds")
      ->check(CLI::Range(1.0, 1e9));
  app.add_option("--out", out, "Report path (.csv or .json)");
  app.add_option("--format", format, "Report format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--snapshot", snapshot, "Filter snapshot path");
  app.add_option("--snapshot-period", snapshot_period,
                 "Campaign seconds between snapshots (live mode); readouts between snapshots in replay");
  app.add_option("--replay", replay, "Replay a trace file instead of listening");
  app.add_option("--replay-rate", replay_rate, "Virtual executions per second in replay")
      ->check(CLI::PositiveNumber);
  app.add_option("--resume", resume, "Start from a filter snapshot");
  app.add_option("--skip", skip,
                 "Replay: frames to skip (default: the resumed filter's add count)");
  app.add_flag("--exact-oracle", exact_oracle, "Also keep an exact distinct count");
  app.add_option("--time-scale", time_scale, "Campaign seconds per wall second (live mode)")
      ->check(CLI::PositiveNumber);
  app.add_option("--duration", duration, "Stop after this many campaign seconds (live mode)");

  CLI11_PARSE(app, argc, argv);

  lsc::CollectorOptions copts;
  copts.period_sec = period;
  copts.exact_oracle = exact_oracle;
  try {
    if (*n_e_opt || *eps_opt) {
      copts.params = lsc::DeriveParams(n_e ? n_e : 86'400'000, epsilon);
      copts.params.n_bits = std::max(copts.params.n_bits, lsc::FilterParams::kMinBits);
    }
    if (n_bits) copts.params.n_bits = n_bits;
    if (n_hashes) copts.params.n_hashes = n_hashes;
    copts.params.Validate();
  } catch (const std::exception &e) {
    std::cerr << "lsc-collector: " << e.what() << "\n";
    return 2;
  }

  lsc::ReportFormat report_format = lsc::FormatForPath(out);
  if (format == "json") report_format = lsc::ReportFormat::kJson;
  if (format == "csv") report_format = lsc::ReportFormat::kCsv;

  if (!replay.empty()) {
    try {
      const std::vector<uint8_t> trace = lsc::ReadTraceFile(replay);
      std::unique_ptr<lsc::Collector> collector;
      lsc::ReplayOptions ropts;
      ropts.execs_per_sec = replay_rate;
      ropts.snapshot_path = snapshot;
      ropts.snapshot_every_rows = static_cast<uint64_t>(snapshot_period);
      if (!resume.empty()) {
        lsc::CoverageFilter restored = lsc::LoadSnapshot(resume);
        const uint64_t start = skip >= 0 ? static_cast<uint64_t>(skip) : restored.adds();
        ropts.start_frame = start;
        collector = std::make_unique<lsc::Collector>(
            copts, std::move(restored), static_cast<double>(start) / replay_rate);
      } else {
        if (skip > 0) ropts.start_frame = static_cast<uint64_t>(skip);
        collector = std::make_unique<lsc::Collector>(copts);
      }
      lsc::ReplayTrace(*collector, trace, ropts);
      if (!snapshot.empty()) collector->Snapshot(snapshot);
      if (!out.empty()) {
        if (!collector->WriteReport(out, report_format)) return 1;
      } else {
        std::cout << (report_format == lsc::ReportFormat::kJson ? collector->RenderJson()
                                                                : collector->RenderCsv());
      }
      std::cerr << "lsc-collector: replayed " << collector->execs() << " frames, "
                << collector->malformed() << " malformed\n";
      return 0;
    } catch (const std::exception &e) {
      std::cerr << "lsc-collector: " << e.what() << "\n";
      return 1;
    }
  }

  lsc::ServerOptions sopts;
  sopts.endpoint = endpoint;
  sopts.time_scale = time_scale;
  sopts.report_path = out;
  sopts.report_format = report_format;
  sopts.snapshot_path = snapshot;
  sopts.snapshot_period_sec = snapshot_period;

  std::unique_ptr<lsc::CollectorServer> server;
  try {
    server = std::make_unique<lsc::CollectorServer>(copts, sopts);
  } catch (const std::exception &e) {
    std::cerr << "lsc-collector: startup failed: " << e.what() << "\n";
    return 1;
  }
  struct sigaction sa {};
  sa.sa_handler = HandleStop;
  sigemptyset(&sa.sa_mask);
  sigaction(SIGINT, &sa, nullptr);
  sigaction(SIGTERM, &sa, nullptr);

  std::cerr << "lsc-collector: listening on " << server->endpoint() << " (export "
            << lsc::kEndpointEnvVar << "=" << server->endpoint() << ")\n";

  std::thread deadline;
  if (duration > 0) {
    deadline = std::thread([&] {
      while (!g_stop.load() && server->CampaignSeconds() < duration) {
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
      }
      g_stop.store(true);
    });
  }
  const int rc = server->Run(&g_stop);
  if (deadline.joinable()) deadline.join();
  if (out.empty()) std::cout << server->collector().RenderCsv();
  std::cerr << "lsc-collector: " << server->collector().execs() << " frames, "
            << server->collector().malformed() << " malformed\n";
  return rc;
}
