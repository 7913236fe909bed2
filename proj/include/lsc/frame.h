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

// Execution frame: one per finished execution, 21 bytes on the wire.
//
//   offset 0  'L' 'S' 'C' 0x01   magic + version
//   offset 4  flags u8           bit 0: abnormal termination
//                                bit 1: edge set overflowed in the producer
//   offset 5  digest.low  u64 LE
//   offset 13 digest.high u64 LE
//
// A trace file is a plain concatenation of frames.

#ifndef LSC_FRAME_H_
#define LSC_FRAME_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lsc/logic_state.h"

namespace lsc {

inline constexpr size_t kFrameBytes = 21;
inline constexpr uint8_t kFrameVersion = 0x01;
inline constexpr uint8_t kFlagAbnormal = 0x01;
inline constexpr uint8_t kFlagOverflow = 0x02;

using FrameBytes = std::array<uint8_t, kFrameBytes>;

struct ExecFrame {
  uint8_t flags = 0;
  Digest digest;

  bool abnormal() const { return flags & kFlagAbnormal; }
  friend bool operator==(const ExecFrame &, const ExecFrame &) = default;
};

FrameBytes EncodeFrame(const ExecFrame &frame);

// nullopt on wrong length, magic or version.
std::optional<ExecFrame> DecodeFrame(std::span<const uint8_t> bytes);

// Appends frames to a trace file. Not thread-safe.
class TraceWriter {
 public:
  // Throws std::runtime_error if the file cannot be opened.
  explicit TraceWriter(const std::string &path, bool append = false);
  ~TraceWriter();
  TraceWriter(const TraceWriter &) = delete;
  TraceWriter &operator=(const TraceWriter &) = delete;

  // False on a short write.
  bool Write(const ExecFrame &frame);
  void Flush();
  uint64_t frames_written() const { return written_; }

 private:
  std::FILE *file_ = nullptr;
  uint64_t written_ = 0;
};

// Whole trace file contents. Throws std::runtime_error if unreadable.
std::vector<uint8_t> ReadTraceFile(const std::string &path);

}  // namespace lsc

#endif  // LSC_FRAME_H_
