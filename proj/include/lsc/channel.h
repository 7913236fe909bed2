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

// Local datagram transport between producers and the collector: a Unix
// domain SOCK_DGRAM socket bound to a filesystem path, one frame per
// datagram. Producers find the path in $LSC_ENDPOINT.

#ifndef LSC_CHANNEL_H_
#define LSC_CHANNEL_H_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace lsc {

inline constexpr const char kEndpointEnvVar[] = "LSC_ENDPOINT";
inline constexpr const char kDefaultEndpoint[] = "/tmp/lsc-collector.sock";

// `explicit_path` if non-empty, else $LSC_ENDPOINT, else kDefaultEndpoint.
std::string ResolveEndpoint(const std::string &explicit_path);

class EndpointBusyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DatagramReceiver {
 public:
  // Binds `path`. A stale socket file with no listener is replaced; a live
  // one raises EndpointBusyError. Other failures raise std::runtime_error.
  explicit DatagramReceiver(const std::string &path);
  ~DatagramReceiver();
  DatagramReceiver(const DatagramReceiver &) = delete;
  DatagramReceiver &operator=(const DatagramReceiver &) = delete;

  // Waits up to `timeout` for one datagram. Returns its length (which may
  // exceed buf.size(); the datagram is then truncated), or -1 on timeout.
  long Receive(std::span<uint8_t> buf, std::chrono::milliseconds timeout);

  const std::string &path() const { return path_; }

 private:
  int fd_ = -1;
  std::string path_;
};

class DatagramSender {
 public:
  // Throws std::runtime_error if the endpoint is not reachable.
  explicit DatagramSender(const std::string &path);
  ~DatagramSender();
  DatagramSender(const DatagramSender &) = delete;
  DatagramSender &operator=(const DatagramSender &) = delete;

  // Blocks while the receiver queue is full. False on any other error.
  bool Send(std::span<const uint8_t> bytes);

 private:
  int fd_ = -1;
};

}  // namespace lsc

#endif  // LSC_CHANNEL_H_
