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

#ifndef LSC_COLLECTOR_SERVER_H_
#define LSC_COLLECTOR_SERVER_H_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "lsc/channel.h"
#include "lsc/collector.h"

namespace lsc {

struct ServerOptions {
  std::string endpoint;
  // Campaign seconds per wall-clock second. 1 for real campaigns; larger
  // values compress the readout schedule for accelerated runs.
  double time_scale = 1.0;
  std::string report_path;
  // Defaults to the report path extension.
  std::optional<ReportFormat> report_format;
  std::string snapshot_path;
  // Campaign seconds between snapshots (0 = only at shutdown).
  double snapshot_period_sec = 0;
  // Record per-frame ingest latency in one-second wall-clock buckets.
  bool track_latency = false;
};

struct LatencyBucket {
  uint64_t frames = 0;
  uint64_t total_ns = 0;
  double mean_ns() const {
    return frames ? static_cast<double>(total_ns) / static_cast<double>(frames) : 0.0;
  }
};

// Live collector: a receive thread feeds Collector::Ingest() while the
// calling thread of Run() takes readouts on the monotonic clock.
class CollectorServer {
 public:
  // Binds the endpoint immediately; throws EndpointBusyError if taken.
  CollectorServer(const CollectorOptions &collector_options,
                  const ServerOptions &server_options);
  ~CollectorServer();

  // Blocks until RequestStop() (or `stop` becomes true), then flushes the
  // final row, snapshot and report. Returns 0 on a clean shutdown.
  int Run(const std::atomic<bool> *stop = nullptr);
  void RequestStop() { stop_requested_.store(true); }

  // Campaign time since Run() started.
  double CampaignSeconds() const;

  const Collector &collector() const { return *collector_; }
  const std::string &endpoint() const { return receiver_->path(); }
  uint64_t received() const { return received_.load(); }
  // Valid after Run() returns.
  const std::vector<LatencyBucket> &latency() const { return latency_; }

 private:
  void ReceiveLoop();
  void Persist(bool final);

  ServerOptions options_;
  std::unique_ptr<Collector> collector_;
  std::unique_ptr<DatagramReceiver> receiver_;
  std::atomic<bool> stop_requested_{false};
  std::atomic<bool> receiving_{false};
  std::atomic<uint64_t> received_{0};
  std::chrono::steady_clock::time_point start_;
  std::vector<LatencyBucket> latency_;
};

}  // namespace lsc

#endif  // LSC_COLLECTOR_SERVER_H_
