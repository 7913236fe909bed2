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

#include "lsc/collector.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace lsc {
namespace {

constexpr double kTimeSlack = 1e-9;

void AppendDouble(std::string &out, double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, end);
}

bool WriteFileAtomically(const std::string &path, std::span<const uint8_t> data) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    out.write(reinterpret_cast<const char *>(data.data()),
              static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) {
      out.close();
      std::remove(tmp.c_str());
      return false;
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  return !ec;
}

std::span<const uint8_t> AsBytes(const std::string &s) {
  return {reinterpret_cast<const uint8_t *>(s.data()), s.size()};
}

}  // namespace

ReportFormat FormatForPath(const std::string &path) {
  return std::filesystem::path(path).extension() == ".json" ? ReportFormat::kJson
                                                            : ReportFormat::kCsv;
}

Collector::Collector(const CollectorOptions &options)
    : options_(options), filter_(options.params) {
  if (!(options_.period_sec >= 1.0)) {
    throw std::invalid_argument("readout period must be at least 1 s");
  }
  if (options_.exact_oracle) oracle_.emplace();
}

Collector::Collector(const CollectorOptions &options, CoverageFilter restored,
                     double resume_t_sec)
    : Collector(CollectorOptions{restored.params(), options.period_sec,
                                 options.exact_oracle}) {
  filter_ = std::move(restored);
  execs_ = filter_.adds();
  last_t_ = resume_t_sec;
  last_execs_ = filter_.adds();
  last_coverage_ = filter_.saturated() ? 0.0 : filter_.Estimate();
}

bool Collector::Ingest(std::span<const uint8_t> bytes) {
  const std::optional<ExecFrame> frame = DecodeFrame(bytes);
  if (!frame) {
    malformed_.fetch_add(1, std::memory_order_relaxed);
    return false;
  }
  filter_.Add(frame->digest);
  if (oracle_) {
    std::lock_guard lock(oracle_mu_);
    oracle_->Add(frame->digest);
  }
  if (frame->abnormal()) abnormal_.fetch_add(1, std::memory_order_relaxed);
  execs_.fetch_add(1, std::memory_order_relaxed);
  return true;
}

std::optional<uint64_t> Collector::exact_count() const {
  if (!oracle_) return std::nullopt;
  std::lock_guard lock(oracle_mu_);
  return oracle_->count();
}

ReadoutRow Collector::MakeRow(double t_sec) {
  ReadoutRow row;
  row.t_sec = t_sec;
  row.execs = execs();
  const uint64_t ones = filter_.ones();
  if (ones >= filter_.params().n_bits) {
    row.saturated = true;
    row.coverage = last_coverage_;
    if (!warned_saturated_) {
      std::fprintf(stderr, "[lsc] coverage filter saturated at t=%.1fs; holding last estimate\n",
                   t_sec);
      warned_saturated_ = true;
    }
  } else {
    row.coverage = std::max(last_coverage_,
                            CoverageFilter::EstimateFromOnes(ones, filter_.params()));
    if (!warned_density_ &&
        static_cast<double>(ones) >= kDensityWarning * static_cast<double>(filter_.params().n_bits)) {
      std::fprintf(stderr, "[lsc] filter density above %.0f%%; estimates degrade\n",
                   kDensityWarning * 100);
      warned_density_ = true;
    }
  }
  const double d_cov = row.coverage - last_coverage_;
  const double d_t = t_sec - last_t_;
  const uint64_t d_execs = row.execs >= last_execs_ ? row.execs - last_execs_ : 0;
  row.new_per_sec_ins = d_t > 0 ? d_cov / d_t : 0.0;
  row.new_per_sec_avg = t_sec > 0 ? row.coverage / t_sec : 0.0;
  row.new_per_exec_ins_pct = d_execs > 0 ? d_cov / static_cast<double>(d_execs) * 100.0 : 0.0;
  row.new_per_exec_avg_pct =
      row.execs > 0 ? row.coverage / static_cast<double>(row.execs) * 100.0 : 0.0;
  row.exact = exact_count();

  last_t_ = t_sec;
  last_execs_ = row.execs;
  last_coverage_ = row.coverage;
  return row;
}

const ReadoutRow &Collector::Readout(double t_sec) {
  if (t_sec + kTimeSlack < last_t_ + options_.period_sec) {
    throw std::logic_error("readout requested before a full period elapsed");
  }
  rows_.push_back(MakeRow(t_sec));
  return rows_.back();
}

std::optional<ReadoutRow> Collector::FinalReadout(double t_sec) {
  if (!rows_.empty() && std::abs(t_sec - rows_.back().t_sec) <= kTimeSlack) {
    return std::nullopt;
  }
  if (rows_.empty() && t_sec < last_t_) t_sec = last_t_;
  rows_.push_back(MakeRow(t_sec));
  return rows_.back();
}

std::string Collector::RenderCsv() const {
  std::string out = kCsvHeader;
  if (options_.exact_oracle) out += ",exact";
  out += '\n';
  for (const ReadoutRow &r : rows_) {
    AppendDouble(out, r.t_sec);
    out += ',';
    out += std::to_string(r.execs);
    for (double v : {r.coverage, r.new_per_sec_ins, r.new_per_sec_avg,
                     r.new_per_exec_ins_pct, r.new_per_exec_avg_pct}) {
      out += ',';
      AppendDouble(out, v);
    }
    if (options_.exact_oracle) {
      out += ',';
      out += std::to_string(r.exact.value_or(0));
    }
    out += '\n';
  }
  return out;
}

std::string Collector::RenderJson() const {
  nlohmann::ordered_json doc;
  doc["params"] = {{"n_bits", filter_.params().n_bits},
                   {"n_hashes", filter_.params().n_hashes},
                   {"period_sec", options_.period_sec}};
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const ReadoutRow &r : rows_) {
    nlohmann::ordered_json j = {{"t_sec", r.t_sec},
                                {"execs", r.execs},
                                {"coverage", r.coverage},
                                {"new_per_sec_ins", r.new_per_sec_ins},
                                {"new_per_sec_avg", r.new_per_sec_avg},
                                {"new_per_exec_ins_pct", r.new_per_exec_ins_pct},
                                {"new_per_exec_avg_pct", r.new_per_exec_avg_pct}};
    if (r.saturated) j["saturated"] = true;
    if (r.exact) j["exact"] = *r.exact;
    rows.push_back(std::move(j));
  }
  doc["rows"] = std::move(rows);
  doc["summary"] = {{"execs", execs()},
                    {"malformed", malformed()},
                    {"abnormal", abnormal()},
                    {"ones", filter_.ones()}};
  return doc.dump(2) + "\n";
}

bool Collector::WriteReport(const std::string &path, ReportFormat format) const {
  const std::string text = format == ReportFormat::kJson ? RenderJson() : RenderCsv();
  if (!WriteFileAtomically(path, AsBytes(text))) {
    std::fprintf(stderr, "[lsc] failed to write report %s\n", path.c_str());
    return false;
  }
  return true;
}

bool Collector::Snapshot(const std::string &path) const {
  if (!WriteFileAtomically(path, filter_.Serialize())) {
    std::fprintf(stderr, "[lsc] failed to write snapshot %s; measurement continues\n",
                 path.c_str());
    return false;
  }
  return true;
}

CoverageFilter LoadSnapshot(const std::string &path) {
  const std::vector<uint8_t> bytes = ReadTraceFile(path);
  return CoverageFilter::Deserialize(bytes);
}

void ReplayTrace(Collector &collector, std::span<const uint8_t> trace,
                 const ReplayOptions &options) {
  const double period = collector.options().period_sec;
  const double window = period * options.execs_per_sec;
  if (!(options.execs_per_sec > 0) || window < 1.0) {
    throw std::invalid_argument("replay rate must give at least one frame per period");
  }
  const auto frames_per_window = static_cast<uint64_t>(std::llround(window));

  const uint64_t whole_frames = trace.size() / kFrameBytes;
  const bool partial_tail = trace.size() % kFrameBytes != 0;
  uint64_t end = whole_frames;
  if (options.max_frames) end = std::min(end, options.start_frame + options.max_frames);

  uint64_t rows_emitted = 0;
  for (uint64_t g = options.start_frame; g < end; ++g) {
    collector.Ingest(trace.subspan(g * kFrameBytes, kFrameBytes));
    if ((g + 1) % frames_per_window == 0) {
      collector.Readout(static_cast<double>((g + 1) / frames_per_window) * period);
      ++rows_emitted;
      if (options.snapshot_every_rows && !options.snapshot_path.empty() &&
          rows_emitted % options.snapshot_every_rows == 0) {
        collector.Snapshot(options.snapshot_path);
      }
    }
  }
  // A partial record at the end of the trace is one malformed frame.
  if (partial_tail && end == whole_frames) {
    collector.Ingest(trace.subspan(whole_frames * kFrameBytes));
  }
  if (options.final_row) {
    collector.FinalReadout(static_cast<double>(end) / options.execs_per_sec);
  }
}

}  // namespace lsc
