// Copyright 2026 The eegcare Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal TCP stream sockets with length-prefixed message framing
// (4-byte little-endian length, then payload).

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eegcare::net {

using Bytes = std::vector<std::uint8_t>;
using Millis = std::chrono::milliseconds;

inline constexpr std::uint32_t kMaxMessageBytes = 16u << 20;

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The peer closed the connection.
class ConnectionClosed : public TransportError {
 public:
  ConnectionClosed() : TransportError("connection closed by peer") {}
};

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  // "host:port" or ":port"; throws std::invalid_argument.
  static Endpoint parse(std::string_view text);
  std::string to_string() const;
  bool operator==(const Endpoint&) const = default;
};

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket();
  Socket(Socket&& other) noexcept;
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }
  void close();
  // Half-close both directions without releasing the descriptor; unblocks a
  // reader on another thread.
  void shutdown();

  void send_all(std::span<const std::uint8_t> bytes);
  // Waits until readable; false on timeout.
  bool wait_readable(Millis timeout) const;

  void send_message(std::span<const std::uint8_t> payload);
  // nullopt on timeout before the first byte. Throws ConnectionClosed when
  // the peer closes, TransportError on other failures.
  std::optional<Bytes> recv_message(Millis timeout);

 private:
  void recv_exact(std::uint8_t* dst, std::size_t n);
  int fd_ = -1;
};

class Listener {
 public:
  Listener() = default;
  // Binds and listens; port 0 picks an ephemeral port. Throws
  // TransportError when the endpoint is busy.
  explicit Listener(const Endpoint& endpoint);
  Listener(Listener&&) noexcept = default;
  Listener& operator=(Listener&&) noexcept = default;

  bool valid() const { return socket_.valid(); }
  int fd() const { return socket_.fd(); }
  Endpoint endpoint() const { return bound_; }
  std::optional<Socket> accept(Millis timeout);
  void close() { socket_.close(); }

 private:
  Socket socket_;
  Endpoint bound_;
};

// Single connection attempt.
Socket connect_to(const Endpoint& endpoint, Millis timeout);
// Retries refused connections until `total` elapses.
Socket connect_with_retry(const Endpoint& endpoint, Millis total, Millis interval = Millis(50));

}  // namespace eegcare::net
