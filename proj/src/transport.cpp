// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#include "splitwire/transport.hpp"

#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "splitwire/errors.hpp"

namespace splitwire::pipeline {

namespace {

std::string errno_text() { return std::strerror(errno); }

// Waits for readability; false on timeout.
bool wait_readable(int fd, std::optional<std::chrono::milliseconds> timeout) {
  pollfd pfd{fd, POLLIN, 0};
  const int ms = timeout ? static_cast<int>(timeout->count()) : -1;
  for (;;) {
    const int rc = ::poll(&pfd, 1, ms);
    if (rc > 0) return true;
    if (rc == 0) return false;
    if (errno != EINTR) throw TransportError("poll: " + errno_text());
  }
}

}  // namespace

Endpoint Endpoint::parse(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw ArgumentError("address must be HOST:PORT, got '" + text + "'");
  }
  const std::string port_text = text.substr(colon + 1);
  if (port_text.find_first_not_of("0123456789") != std::string::npos || port_text.size() > 5) {
    throw ArgumentError("bad port in '" + text + "'");
  }
  const unsigned long port = std::stoul(port_text);
  if (port > 65535) throw ArgumentError("port out of range in '" + text + "'");
  return {text.substr(0, colon), static_cast<std::uint16_t>(port)};
}

std::string Endpoint::str() const { return host + ":" + std::to_string(port); }

// TokenBucket ----------------------------------------------------------------

TokenBucket::TokenBucket(double bytes_per_second, std::chrono::microseconds tick)
    : rate_(bytes_per_second), tick_(tick), last_(Clock::now()) {
  if (!(rate_ > 0.0)) throw ArgumentError("token bucket rate must be > 0");
  if (tick_.count() <= 0) throw ArgumentError("token bucket tick must be > 0");
  capacity_ = std::max(1.0, rate_ * std::chrono::duration<double>(tick_).count());
  tokens_ = capacity_;
}

void TokenBucket::refill(Clock::time_point now) {
  const auto ticks = (now - last_) / tick_;
  if (ticks <= 0) return;
  last_ += tick_ * ticks;
  tokens_ = std::min(capacity_, tokens_ + rate_ * std::chrono::duration<double>(tick_).count() * static_cast<double>(ticks));
}

std::size_t TokenBucket::acquire(std::size_t want) {
  if (want == 0) return 0;
  for (;;) {
    refill(Clock::now());
    if (tokens_ >= 1.0) {
      const auto grant = std::min<std::size_t>(want, static_cast<std::size_t>(std::floor(tokens_)));
      tokens_ -= static_cast<double>(grant);
      return grant;
    }
    std::this_thread::sleep_until(last_ + tick_);
  }
}

// Socket ---------------------------------------------------------------------

Socket::~Socket() { close(); }

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.release();
  }
  return *this;
}

int Socket::release() {
  const int fd = fd_;
  fd_ = -1;
  return fd;
}

void Socket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void Socket::send_all(std::span<const std::uint8_t> bytes, TokenBucket* limiter) {
  std::size_t off = 0;
  while (off < bytes.size()) {
    std::size_t chunk = bytes.size() - off;
    if (limiter) chunk = limiter->acquire(chunk);
    std::size_t sent_chunk = 0;
    while (sent_chunk < chunk) {
      const ssize_t n = ::send(fd_, bytes.data() + off + sent_chunk, chunk - sent_chunk, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError("send: " + errno_text());
      }
      sent_chunk += static_cast<std::size_t>(n);
    }
    off += chunk;
  }
}

bool Socket::recv_exact(std::span<std::uint8_t> out, std::optional<std::chrono::milliseconds> timeout) {
  std::size_t got = 0;
  while (got < out.size()) {
    if (!wait_readable(fd_, timeout)) throw TransportError("receive timed out");
    const ssize_t n = ::recv(fd_, out.data() + got, out.size() - got, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError("recv: " + errno_text());
    }
    if (n == 0) {
      if (got == 0) return false;
      throw TransportError("connection closed mid-frame");
    }
    got += static_cast<std::size_t>(n);
  }
  return true;
}

Socket connect_to(const Endpoint& ep) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(ep.port);
  if (const int rc = ::getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw TransportError("resolve " + ep.str() + ": " + ::gai_strerror(rc));
  }
  std::string last_error = "no addresses";
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (!s.valid()) {
      last_error = errno_text();
      continue;
    }
    if (::connect(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0) {
      ::freeaddrinfo(res);
      const int one = 1;
      ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      return s;
    }
    last_error = errno_text();
  }
  ::freeaddrinfo(res);
  throw TransportError("connect " + ep.str() + ": " + last_error);
}

// Listener -------------------------------------------------------------------

Listener::Listener(const Endpoint& ep) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(ep.port);
  const char* host = ep.host.empty() ? nullptr : ep.host.c_str();
  if (const int rc = ::getaddrinfo(host, port.c_str(), &hints, &res); rc != 0) {
    throw TransportError("resolve " + ep.str() + ": " + ::gai_strerror(rc));
  }
  std::string last_error = "no addresses";
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (!s.valid()) {
      last_error = errno_text();
      continue;
    }
    const int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(s.fd(), 64) == 0) {
      sockaddr_storage addr{};
      socklen_t len = sizeof(addr);
      ::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
      port_ = addr.ss_family == AF_INET6 ? ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port)
                                         : ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
      sock_ = std::move(s);
      break;
    }
    last_error = errno_text();
  }
  ::freeaddrinfo(res);
  if (!sock_.valid()) throw TransportError("bind " + ep.str() + ": " + last_error);
}

std::optional<Socket> Listener::accept(std::chrono::milliseconds timeout) {
  if (!wait_readable(sock_.fd(), timeout)) return std::nullopt;
  const int fd = ::accept(sock_.fd(), nullptr, nullptr);
  if (fd < 0) {
    if (errno == EINTR || errno == ECONNABORTED || errno == EAGAIN) return std::nullopt;
    throw TransportError("accept: " + errno_text());
  }
  Socket s(fd);
  const int one = 1;
  ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return s;
}

// Framing --------------------------------------------------------------------

void send_message(Socket& sock, const WireMessage& m, TokenBucket* limiter) {
  const auto bytes = encode_message(m);
  sock.send_all(bytes, limiter);
}

std::optional<WireMessage> recv_message(Socket& sock, std::optional<std::chrono::milliseconds> timeout,
                                        std::uint64_t max_payload) {
  std::vector<std::uint8_t> header(kPrefixBytes);
  if (!sock.recv_exact(header, timeout)) return std::nullopt;
  const std::size_t ndim = parse_prefix(header);
  header.resize(header_size(ndim));
  if (!sock.recv_exact(std::span(header).subspan(kPrefixBytes), timeout)) {
    throw TransportError("connection closed mid-frame");
  }
  FrameHeader h = parse_header(header);
  if (h.payload_len > max_payload) throw ProtocolError("payload of " + std::to_string(h.payload_len) + " bytes exceeds limit");
  WireMessage m;
  m.type = h.type;
  m.dims = std::move(h.dims);
  m.scale = h.scale;
  m.zero_point = h.zero_point;
  m.payload.resize(h.payload_len);
  if (!m.payload.empty() && !sock.recv_exact(m.payload, timeout)) throw TransportError("connection closed mid-frame");
  return m;
}

}  // namespace splitwire::pipeline
