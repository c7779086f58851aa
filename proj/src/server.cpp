// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#include "splitwire/server.hpp"

#include <poll.h>

#include <iostream>

#include "splitwire/codec.hpp"
#include "splitwire/errors.hpp"

namespace splitwire::pipeline {

namespace {

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

bool readable(int fd, std::chrono::milliseconds timeout) {
  pollfd pfd{fd, POLLIN, 0};
  return ::poll(&pfd, 1, static_cast<int>(timeout.count())) != 0;
}

void charge(double seconds, TailMode mode) {
  if (mode == TailMode::Sleep && seconds > 0.0) {
    std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
  }
}

}  // namespace

Server::Server(ServerOptions opts) : opts_(std::move(opts)), listener_(opts_.bind) {}

Server::~Server() { stop(); }

void Server::log(const std::string& msg) const {
  if (opts_.log) {
    opts_.log(msg);
  } else {
    static std::mutex log_mu;
    std::lock_guard lock(log_mu);
    std::cerr << "[splitwire-server] " << msg << '\n';
  }
}

void Server::start() {
  if (accept_thread_.joinable()) return;
  accept_thread_ = std::thread([this] { serve_forever(); });
}

void Server::stop() {
  stopping_ = true;
  if (accept_thread_.joinable() && accept_thread_.get_id() != std::this_thread::get_id()) accept_thread_.join();
  std::list<Worker> workers;
  {
    std::lock_guard lock(mu_);
    workers.swap(workers_);
  }
  for (auto& w : workers) {
    if (w.thread.joinable()) w.thread.join();
  }
}

void Server::reap_finished_locked() {
  for (auto it = workers_.begin(); it != workers_.end();) {
    if (*it->done) {
      it->thread.join();
      it = workers_.erase(it);
    } else {
      ++it;
    }
  }
}

ServerStats Server::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

void Server::serve_forever() {
  while (!stopping_) {
    std::optional<Socket> sock;
    try {
      sock = listener_.accept(std::chrono::milliseconds(50));
    } catch (const TransportError& e) {
      log(std::string("accept failed: ") + e.what());
      continue;
    }
    if (!sock) continue;
    std::lock_guard lock(mu_);
    ++stats_.connections;
    reap_finished_locked();
    auto done = std::make_shared<std::atomic<bool>>(false);
    workers_.push_back({std::thread([this, done, s = std::move(*sock)]() mutable {
                          handle_connection(std::move(s));
                          *done = true;
                        }),
                        done});
  }
}

void Server::handle_connection(Socket sock) {
  // Poll in short slices so stop() is honoured while a client idles.
  constexpr auto kSlice = std::chrono::milliseconds(50);
  auto idle = std::chrono::milliseconds(0);
  try {
    while (!stopping_) {
      if (!readable(sock.fd(), kSlice)) {
        idle += kSlice;
        if (idle >= opts_.idle_timeout) {
          std::lock_guard lock(mu_);
          ++stats_.idle_closes;
          return;
        }
        continue;
      }
      idle = std::chrono::milliseconds(0);
      auto msg = recv_message(sock, opts_.idle_timeout, opts_.max_payload);
      if (!msg) return;  // peer closed
      {
        std::lock_guard lock(mu_);
        ++stats_.frames;
      }
      switch (msg->type) {
        case MsgType::QTensor8:
        case MsgType::QTensor16:
        case MsgType::FTensor32: {
          Tensor restored = [&] {
            try {
              return codec::dequantize(to_quantized(*msg));
            } catch (const CodecError& e) {
              throw ProtocolError(std::string("undecodable tensor: ") + e.what());
            } catch (const ShapeError& e) {
              throw ProtocolError(std::string("bad tensor shape: ") + e.what());
            }
          }();
          if (opts_.on_tensor) opts_.on_tensor(restored);
          charge(opts_.tail_seconds, opts_.tail_mode);
          send_message(sock, detection_result(tensor_checksum(restored)));
          break;
        }
        case MsgType::JpegImage:
          charge(opts_.full_model_seconds, opts_.tail_mode);
          send_message(sock, detection_result(fnv1a(msg->payload)));
          break;
        default:
          throw ProtocolError("unexpected client frame type " + std::to_string(static_cast<int>(msg->type)));
      }
    }
  } catch (const ProtocolError& e) {
    {
      std::lock_guard lock(mu_);
      ++stats_.protocol_errors;
    }
    log(std::string("protocol error, closing connection: ") + e.what());
  } catch (const std::exception& e) {
    log(std::string("connection error: ") + e.what());
  }
}

void serve(const Endpoint& bind, const latency::ExecutionProfile& prof, TailMode mode,
           std::chrono::milliseconds idle_timeout) {
  ServerOptions opts;
  opts.bind = bind;
  opts.tail_seconds = prof.t_tail;
  opts.full_model_seconds = prof.t_edge_full;
  opts.tail_mode = mode;
  opts.idle_timeout = idle_timeout;
  Server server(std::move(opts));
  std::clog << "[splitwire-server] listening on " << bind.host << ":" << server.port() << std::endl;
  server.serve_forever();
}

}  // namespace splitwire::pipeline
