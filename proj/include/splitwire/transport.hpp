// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "splitwire/wire.hpp"

namespace splitwire::pipeline {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  /// "host:port"; ArgumentError when malformed.
  static Endpoint parse(const std::string& text);
  std::string str() const;
};

/// Byte-granular token bucket refilled in fixed ticks.
class TokenBucket {
 public:
  using Clock = std::chrono::steady_clock;

  TokenBucket(double bytes_per_second, std::chrono::microseconds tick = std::chrono::milliseconds(10));

  /// Blocks until at least one byte of budget exists; returns how many of
  /// `want` bytes may be sent now (>= 1 when want >= 1).
  std::size_t acquire(std::size_t want);

  double rate() const { return rate_; }

 private:
  void refill(Clock::time_point now);

  double rate_;
  std::chrono::microseconds tick_;
  double capacity_;
  double tokens_;
  Clock::time_point last_;
};

/// Owning TCP socket handle.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket();
  Socket(Socket&& other) noexcept : fd_(other.release()) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }
  int release();
  void close();

  /// Sends all bytes; with a limiter, paces the writes through it.
  void send_all(std::span<const std::uint8_t> bytes, TokenBucket* limiter = nullptr);
  /// Fills `out` completely. Returns false on orderly EOF before the first
  /// byte; throws TransportError on EOF mid-buffer, timeout, or error.
  bool recv_exact(std::span<std::uint8_t> out, std::optional<std::chrono::milliseconds> timeout = std::nullopt);

 private:
  int fd_ = -1;
};

Socket connect_to(const Endpoint& ep);

class Listener {
 public:
  /// Binds and listens; port 0 picks an ephemeral port.
  explicit Listener(const Endpoint& ep);
  std::uint16_t port() const { return port_; }
  /// Waits up to `timeout` for a connection.
  std::optional<Socket> accept(std::chrono::milliseconds timeout);

 private:
  Socket sock_;
  std::uint16_t port_ = 0;
};

/// Frames and sends one message.
void send_message(Socket& sock, const WireMessage& m, TokenBucket* limiter = nullptr);

/// Reads one frame. nullopt on clean EOF between frames. ProtocolError on a
/// bad frame (including payloads above max_payload); TransportError on I/O.
std::optional<WireMessage> recv_message(Socket& sock, std::optional<std::chrono::milliseconds> timeout = std::nullopt,
                                        std::uint64_t max_payload = std::uint64_t{1} << 30);

}  // namespace splitwire::pipeline
