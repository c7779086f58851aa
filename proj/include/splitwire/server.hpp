// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "splitwire/latency.hpp"
#include "splitwire/tensor.hpp"
#include "splitwire/transport.hpp"

namespace splitwire::pipeline {

enum class TailMode {
  Virtual,  // reply immediately; the client charges t_tail
  Sleep,    // sleep for t_tail before replying
};

struct ServerOptions {
  Endpoint bind{"127.0.0.1", 0};
  double tail_seconds = 0.0;        // charged per tensor frame
  double full_model_seconds = 0.0;  // charged per JPEG frame
  TailMode tail_mode = TailMode::Virtual;
  std::chrono::milliseconds idle_timeout{30000};
  std::uint64_t max_payload = std::uint64_t{1} << 30;
  /// Called with every dequantized tensor (from connection threads).
  std::function<void(const Tensor&)> on_tensor;
  /// Log sink; defaults to stderr.
  std::function<void(const std::string&)> log;
};

struct ServerStats {
  std::uint64_t connections = 0;
  std::uint64_t frames = 0;
  std::uint64_t protocol_errors = 0;
  std::uint64_t idle_closes = 0;
};

/// Edge-side endpoint: receives head outputs, dequantizes them, runs the
/// (profiled) tail and answers with DETECTION_RESULT frames. One thread per
/// connection; a malformed frame only closes its own connection.
class Server {
 public:
  explicit Server(ServerOptions opts);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const { return listener_.port(); }

  /// Accept loop; returns after stop().
  void serve_forever();
  /// Runs serve_forever on a background thread.
  void start();
  void stop();

  ServerStats stats() const;

 private:
  struct Worker {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };

  void handle_connection(Socket sock);
  void reap_finished_locked();
  void log(const std::string& msg) const;

  ServerOptions opts_;
  Listener listener_;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  mutable std::mutex mu_;
  std::list<Worker> workers_;
  ServerStats stats_;
};

/// Blocking server loop for `bind`, with tail/full-model timing from `prof`.
void serve(const Endpoint& bind, const latency::ExecutionProfile& prof, TailMode mode = TailMode::Virtual,
           std::chrono::milliseconds idle_timeout = std::chrono::milliseconds(30000));

}  // namespace splitwire::pipeline
