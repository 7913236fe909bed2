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

// Measurement core: frames in, periodic coverage rows out.
//
// Ingest() may run on one thread while Readout() runs on another; neither
// blocks the other except for the optional exact-oracle set.

#ifndef LSC_COLLECTOR_H_
#define LSC_COLLECTOR_H_

#include <atomic>
#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lsc/coverage_filter.h"
#include "lsc/frame.h"

namespace lsc {

struct ReadoutRow {
  double t_sec = 0;
  uint64_t execs = 0;
  double coverage = 0;
  double new_per_sec_ins = 0;
  double new_per_sec_avg = 0;
  double new_per_exec_ins_pct = 0;
  double new_per_exec_avg_pct = 0;
  // Filter was full; `coverage` holds the last finite estimate.
  bool saturated = false;
  // Exact distinct count, only with the exact oracle enabled.
  std::optional<uint64_t> exact;
};

enum class ReportFormat { kCsv, kJson };

// "csv" or "json" by extension, CSV otherwise.
ReportFormat FormatForPath(const std::string &path);

inline constexpr const char kCsvHeader[] =
    "t_sec,execs,coverage,new_per_sec_ins,new_per_sec_avg,"
    "new_per_exec_ins_pct,new_per_exec_avg_pct";

struct CollectorOptions {
  FilterParams params = DefaultParams();
  double period_sec = 10.0;
  bool exact_oracle = false;
};

class Collector {
 public:
  // Throws std::invalid_argument for period < 1 s or invalid params.
  explicit Collector(const CollectorOptions &options);
  // Resumes from a restored filter. Executions so far are taken to be
  // filter.adds(); `resume_t_sec` is the campaign time of the snapshot.
  Collector(const CollectorOptions &options, CoverageFilter restored,
            double resume_t_sec);

  // Decodes one frame and adds its digest. Malformed input is counted and
  // dropped; never throws.
  bool Ingest(std::span<const uint8_t> bytes);

  // Emits the row for campaign time `t_sec`. Throws std::logic_error if less
  // than one period has passed since the previous row.
  const ReadoutRow &Readout(double t_sec);
  // Same, without the period check; used for the shutdown flush. Returns
  // nullopt if a row already exists for `t_sec`.
  std::optional<ReadoutRow> FinalReadout(double t_sec);

  const std::vector<ReadoutRow> &rows() const { return rows_; }
  uint64_t execs() const { return execs_.load(std::memory_order_relaxed); }
  uint64_t malformed() const { return malformed_.load(std::memory_order_relaxed); }
  uint64_t abnormal() const { return abnormal_.load(std::memory_order_relaxed); }
  std::optional<uint64_t> exact_count() const;
  const CoverageFilter &filter() const { return filter_; }
  const CollectorOptions &options() const { return options_; }
  double last_row_t() const { return last_t_; }

  std::string RenderCsv() const;
  std::string RenderJson() const;

  // Both write to `path`.tmp then rename. On failure they log to stderr and
  // return false; measurement state is untouched.
  bool WriteReport(const std::string &path, ReportFormat format) const;
  bool Snapshot(const std::string &path) const;

 private:
  ReadoutRow MakeRow(double t_sec);

  CollectorOptions options_;
  CoverageFilter filter_;
  std::atomic<uint64_t> execs_{0};
  std::atomic<uint64_t> malformed_{0};
  std::atomic<uint64_t> abnormal_{0};

  mutable std::mutex oracle_mu_;
  std::optional<OracleSet> oracle_;

  // Readout-side state.
  std::vector<ReadoutRow> rows_;
  double last_t_ = 0;
  uint64_t last_execs_ = 0;
  double last_coverage_ = 0;
  bool warned_density_ = false;
  bool warned_saturated_ = false;
};

// Loads a snapshot file. Throws SnapshotFormatError or std::runtime_error.
CoverageFilter LoadSnapshot(const std::string &path);

// Replays a trace with virtual time: frame i arrives at i / rate seconds and
// a row is emitted every `period` seconds of virtual time, plus a final row
// at the end of the trace. Output depends only on the trace bytes and the
// options.
struct ReplayOptions {
  double execs_per_sec = 1000.0;
  // Frame index to start from (e.g. after resuming from a snapshot).
  uint64_t start_frame = 0;
  // Stop after this many frames (0 = until end of trace).
  uint64_t max_frames = 0;
  // Snapshot after every readout whose row index is a multiple of this
  // (0 = never).
  uint64_t snapshot_every_rows = 0;
  std::string snapshot_path;
  bool final_row = true;
};

// Throws std::invalid_argument when period * rate is below one frame.
void ReplayTrace(Collector &collector, std::span<const uint8_t> trace,
                 const ReplayOptions &options);

}  // namespace lsc

#endif  // LSC_COLLECTOR_H_
