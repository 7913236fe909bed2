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

#include "lsc/channel.h"

#include <poll.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>

namespace lsc {
namespace {

sockaddr_un MakeAddress(const std::string &path) {
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  if (path.size() >= sizeof(addr.sun_path)) {
    throw std::runtime_error("endpoint path too long: " + path);
  }
  std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
  return addr;
}

std::string ErrnoText(const char *what, const std::string &path) {
  return std::string(what) + " " + path + ": " + std::strerror(errno);
}

// True if a socket is currently bound and receiving at `path`.
bool EndpointAlive(const sockaddr_un &addr) {
  const int probe = ::socket(AF_UNIX, SOCK_DGRAM | SOCK_CLOEXEC, 0);
  if (probe < 0) return false;
  const bool alive =
      ::connect(probe, reinterpret_cast<const sockaddr *>(&addr), sizeof(addr)) == 0;
  ::close(probe);
  return alive;
}

}  // namespace

std::string ResolveEndpoint(const std::string &explicit_path) {
  if (!explicit_path.empty()) return explicit_path;
  if (const char *env = std::getenv(kEndpointEnvVar); env && *env) return env;
  return kDefaultEndpoint;
}

DatagramReceiver::DatagramReceiver(const std::string &path) : path_(path) {
  const sockaddr_un addr = MakeAddress(path);
  if (::access(path.c_str(), F_OK) == 0) {
    if (EndpointAlive(addr)) {
      throw EndpointBusyError("endpoint " + path + " is already in use");
    }
    ::unlink(path.c_str());
  }
  fd_ = ::socket(AF_UNIX, SOCK_DGRAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) throw std::runtime_error(ErrnoText("socket() for", path));
  if (::bind(fd_, reinterpret_cast<const sockaddr *>(&addr), sizeof(addr)) != 0) {
    const std::string msg = ErrnoText("cannot bind", path);
    ::close(fd_);
    fd_ = -1;
    if (errno == EADDRINUSE) throw EndpointBusyError(msg);
    throw std::runtime_error(msg);
  }
  int rcvbuf = 8 << 20;
  ::setsockopt(fd_, SOL_SOCKET, SO_RCVBUF, &rcvbuf, sizeof(rcvbuf));
}

DatagramReceiver::~DatagramReceiver() {
  if (fd_ >= 0) {
    ::close(fd_);
    ::unlink(path_.c_str());
  }
}

long DatagramReceiver::Receive(std::span<uint8_t> buf,
                               std::chrono::milliseconds timeout) {
  // Fast path: drain without a poll() when data is already queued.
  ssize_t n = ::recv(fd_, buf.data(), buf.size(), MSG_DONTWAIT | MSG_TRUNC);
  if (n >= 0) return static_cast<long>(n);
  pollfd pfd{fd_, POLLIN, 0};
  if (::poll(&pfd, 1, static_cast<int>(timeout.count())) <= 0) return -1;
  n = ::recv(fd_, buf.data(), buf.size(), MSG_DONTWAIT | MSG_TRUNC);
  return n >= 0 ? static_cast<long>(n) : -1;
}

DatagramSender::DatagramSender(const std::string &path) {
  const sockaddr_un addr = MakeAddress(path);
  fd_ = ::socket(AF_UNIX, SOCK_DGRAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) throw std::runtime_error(ErrnoText("socket() for", path));
  if (::connect(fd_, reinterpret_cast<const sockaddr *>(&addr), sizeof(addr)) != 0) {
    const std::string msg = ErrnoText("cannot connect to", path);
    ::close(fd_);
    fd_ = -1;
    throw std::runtime_error(msg);
  }
}

DatagramSender::~DatagramSender() {
  if (fd_ >= 0) ::close(fd_);
}

bool DatagramSender::Send(std::span<const uint8_t> bytes) {
  for (;;) {
    const ssize_t n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n == static_cast<ssize_t>(bytes.size())) return true;
    if (n < 0 && errno == EINTR) continue;
    return false;
  }
}

}  // namespace lsc
