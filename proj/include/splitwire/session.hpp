// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "splitwire/codec.hpp"
#include "splitwire/filter.hpp"
#include "splitwire/latency.hpp"
#include "splitwire/server.hpp"
#include "splitwire/tensor.hpp"
#include "splitwire/transport.hpp"

namespace splitwire::pipeline {

/// A head output plus its ground-truth class (true when no object of interest).
struct LabeledImage {
  Tensor bottleneck;
  bool empty = false;
};

enum class SessionMode { Simulated, Socket };

struct SessionConfig {
  latency::ExecutionProfile profile;
  latency::ChannelModel channel;
  FilterModel filter;
  bool use_filter = true;
  codec::Width width = codec::Width::k8;
  codec::QuantMode quant_mode = codec::QuantMode::Affine;
  SessionMode mode = SessionMode::Simulated;
  Endpoint server;                    // socket mode only
  TailMode tail_mode = TailMode::Virtual;
  std::uint64_t seed = 0;
};

struct ImageRecord {
  std::size_t image_id = 0;
  bool filtered = false;
  std::size_t bytes_sent = 0;
  double score = 0.0;
  double t_head = 0.0;    // head plus prefilter branch
  double t_uplink = 0.0;  // simulated, or wall-clock in socket mode
  double t_tail = 0.0;
  double total = 0.0;
  /// Checksum of the locally dequantized tensor; in socket mode the server's
  /// echo is verified against it.
  std::uint64_t checksum = 0;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct SessionLog {
  std::vector<ImageRecord> records;

  std::size_t total_bytes() const;
  std::size_t dropped() const;
  double mean_total() const;
  double drop_rate() const;

  friend bool operator==(const SessionLog&, const SessionLog&) = default;
};

/// Per image: head, prefilter, and for kept images quantize -> frame ->
/// transfer -> server dequantize -> tail. Dropped images produce an
/// EMPTY_RESULT locally and send nothing. Simulated mode is deterministic
/// per seed. Socket mode raises TransportError naming the image index.
SessionLog run_session(std::span<const LabeledImage> images, const SessionConfig& cfg);

/// image_id,filtered,bytes_sent,t_head,t_uplink,t_tail,total
void write_session_csv(std::ostream& os, const SessionLog& log);

/// Synthetic head outputs: post-ReLU-like values, class drawn with p_empty.
std::vector<LabeledImage> synthetic_images(std::size_t n, const Shape& shape, double p_empty, std::uint64_t seed);

}  // namespace splitwire::pipeline
