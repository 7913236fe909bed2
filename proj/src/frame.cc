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

#include "lsc/frame.h"

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace lsc {

FrameBytes EncodeFrame(const ExecFrame &frame) {
  FrameBytes out{'L', 'S', 'C', kFrameVersion, frame.flags};
  for (int i = 0; i < 8; ++i) {
    out[5 + i] = static_cast<uint8_t>(frame.digest.low >> (8 * i));
    out[13 + i] = static_cast<uint8_t>(frame.digest.high >> (8 * i));
  }
  return out;
}

std::optional<ExecFrame> DecodeFrame(std::span<const uint8_t> bytes) {
  if (bytes.size() != kFrameBytes) return std::nullopt;
  if (bytes[0] != 'L' || bytes[1] != 'S' || bytes[2] != 'C') return std::nullopt;
  if (bytes[3] != kFrameVersion) return std::nullopt;
  ExecFrame frame;
  frame.flags = bytes[4];
  for (int i = 7; i >= 0; --i) {
    frame.digest.low = (frame.digest.low << 8) | bytes[5 + i];
    frame.digest.high = (frame.digest.high << 8) | bytes[13 + i];
  }
  return frame;
}

TraceWriter::TraceWriter(const std::string &path, bool append) {
  file_ = std::fopen(path.c_str(), append ? "ab" : "wb");
  if (!file_) {
    throw std::runtime_error("cannot open trace file " + path + ": " +
                             std::strerror(errno));
  }
}

TraceWriter::~TraceWriter() {
  if (file_) std::fclose(file_);
}

bool TraceWriter::Write(const ExecFrame &frame) {
  const FrameBytes bytes = EncodeFrame(frame);
  if (std::fwrite(bytes.data(), 1, bytes.size(), file_) != bytes.size()) return false;
  ++written_;
  return true;
}

void TraceWriter::Flush() { std::fflush(file_); }

std::vector<uint8_t> ReadTraceFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read trace file " + path);
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in),
                              std::istreambuf_iterator<char>());
}

}  // namespace lsc
