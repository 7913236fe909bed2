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

#include "lsc/collector_server.h"

#include <algorithm>
#include <array>
#include <cstdio>
#include <stdexcept>

namespace lsc {
namespace {

using Clock = std::chrono::steady_clock;

constexpr auto kPollSlice = std::chrono::milliseconds(50);
constexpr auto kMaxDrain = std::chrono::seconds(1);

}  // namespace

CollectorServer::CollectorServer(const CollectorOptions &collector_options,
                                 const ServerOptions &server_options)
    : options_(server_options),
      collector_(std::make_unique<Collector>(collector_options)) {
  if (!(options_.time_scale > 0)) throw std::invalid_argument("time scale must be positive");
  receiver_ = std::make_unique<DatagramReceiver>(ResolveEndpoint(options_.endpoint));
  start_ = Clock::now();
}

CollectorServer::~CollectorServer() = default;

double CollectorServer::CampaignSeconds() const {
  const std::chrono::duration<double> wall = Clock::now() - start_;
  return wall.count() * options_.time_scale;
}

void CollectorServer::ReceiveLoop() {
  std::array<uint8_t, 256> buf;
  std::optional<Clock::time_point> drain_deadline;
  for (;;) {
    // After shutdown is requested only what is already queued is drained
    // (bounded by kMaxDrain), so a producer that keeps sending cannot hold
    // the collector open.
    if (!drain_deadline && !receiving_.load()) drain_deadline = Clock::now() + kMaxDrain;
    if (drain_deadline && Clock::now() > *drain_deadline) return;
    const long n =
        receiver_->Receive(buf, drain_deadline ? std::chrono::milliseconds(0) : kPollSlice);
    if (n < 0) {
      if (drain_deadline) return;
      continue;
    }
    received_.fetch_add(1, std::memory_order_relaxed);
    const auto len = static_cast<size_t>(n);
    // A datagram longer than the buffer is malformed regardless of content.
    const std::span<const uint8_t> bytes(buf.data(), len <= buf.size() ? len : 0);
    if (!options_.track_latency) {
      collector_->Ingest(bytes);
      continue;
    }
    const auto t0 = Clock::now();
    collector_->Ingest(bytes);
    const auto t1 = Clock::now();
    const auto bucket =
        static_cast<size_t>(std::chrono::duration_cast<std::chrono::seconds>(t0 - start_).count());
    if (latency_.size() <= bucket) latency_.resize(bucket + 1);
    latency_[bucket].frames++;
    latency_[bucket].total_ns += static_cast<uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
  }
}

void CollectorServer::Persist(bool final) {
  if (!options_.snapshot_path.empty() && final) collector_->Snapshot(options_.snapshot_path);
  if (!options_.report_path.empty()) {
    collector_->WriteReport(options_.report_path,
                            options_.report_format.value_or(FormatForPath(options_.report_path)));
  }
}

int CollectorServer::Run(const std::atomic<bool> *stop) {
  receiving_.store(true);
  std::thread receiver([this] { ReceiveLoop(); });

  const double period = collector_->options().period_sec;
  auto stopping = [&] {
    return stop_requested_.load() || (stop && stop->load());
  };
  uint64_t next_row = 1;
  double next_snapshot = options_.snapshot_period_sec;
  while (!stopping()) {
    const double due = static_cast<double>(next_row) * period;
    const auto deadline =
        start_ + std::chrono::duration_cast<Clock::duration>(
                     std::chrono::duration<double>(due / options_.time_scale));
    if (Clock::now() < deadline) {
      std::this_thread::sleep_until(std::min(deadline, Clock::now() + kPollSlice));
      continue;
    }
    collector_->Readout(due);
    ++next_row;
    if (options_.snapshot_period_sec > 0 && due + 1e-9 >= next_snapshot &&
        !options_.snapshot_path.empty()) {
      collector_->Snapshot(options_.snapshot_path);
      next_snapshot += options_.snapshot_period_sec;
    }
    Persist(false);
  }

  receiving_.store(false);
  receiver.join();
  collector_->FinalReadout(std::max(CampaignSeconds(), collector_->last_row_t()));
  Persist(true);
  return 0;
}

}  // namespace lsc
