// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#include "splitwire/session.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>
#include <random>

#include "splitwire/errors.hpp"
#include "splitwire/wire.hpp"

namespace splitwire::pipeline {

std::size_t SessionLog::total_bytes() const {
  std::size_t n = 0;
  for (const auto& r : records) n += r.bytes_sent;
  return n;
}

std::size_t SessionLog::dropped() const {
  std::size_t n = 0;
  for (const auto& r : records) n += r.filtered ? 1 : 0;
  return n;
}

double SessionLog::mean_total() const {
  if (records.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& r : records) acc += r.total;
  return acc / static_cast<double>(records.size());
}

double SessionLog::drop_rate() const {
  return records.empty() ? 0.0 : static_cast<double>(dropped()) / static_cast<double>(records.size());
}

namespace {

using WallClock = std::chrono::steady_clock;

double seconds_since(WallClock::time_point start) {
  return std::chrono::duration<double>(WallClock::now() - start).count();
}

}  // namespace

SessionLog run_session(std::span<const LabeledImage> images, const SessionConfig& cfg) {
  cfg.profile.validate();
  cfg.channel.validate();
  if (cfg.use_filter) cfg.filter.validate();

  std::mt19937_64 rng(cfg.seed);
  const double head_cost = cfg.profile.t_head + (cfg.use_filter ? cfg.profile.t_filter_extra : 0.0);
  const double server_cost = cfg.profile.t_tail + cfg.profile.t_result_return;

  Socket sock;
  std::optional<TokenBucket> limiter;
  if (cfg.mode == SessionMode::Socket) {
    sock = connect_to(cfg.server);
    limiter.emplace(cfg.channel.rate_bps / 8.0);
  }

  SessionLog log;
  log.records.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const LabeledImage& img = images[i];
    ImageRecord rec;
    rec.image_id = i;
    rec.t_head = head_cost;

    if (cfg.use_filter) {
      rec.score = cfg.filter.sample_score(img.empty, rng);
      rec.filtered = filter_decide(rec.score, cfg.filter.threshold) == Decision::Drop;
    } else {
      rec.score = 1.0;
    }
    if (rec.filtered) {
      // EMPTY_RESULT stays on the device; nothing crosses the link.
      rec.total = rec.t_head;
      log.records.push_back(rec);
      continue;
    }

    const codec::QuantizedTensor q = codec::quantize(img.bottleneck, cfg.width, cfg.quant_mode);
    const WireMessage msg = to_message(q);
    const std::vector<std::uint8_t> frame = encode_message(msg);
    rec.bytes_sent = frame.size();
    rec.checksum = tensor_checksum(codec::dequantize(q));

    if (cfg.mode == SessionMode::Simulated) {
      // Server side of the exchange, in-process.
      const Tensor restored = codec::dequantize(to_quantized(decode_message(frame)));
      if (tensor_checksum(restored) != rec.checksum) {
        throw ProtocolError("image " + std::to_string(i) + ": server-side tensor differs from client-side tensor");
      }
      rec.t_uplink = latency::transfer_time(frame.size(), cfg.channel);
      rec.t_tail = server_cost;
    } else {
      try {
        const auto send_start = WallClock::now();
        sock.send_all(frame, &*limiter);
        rec.t_uplink = seconds_since(send_start);
        const auto wait_start = WallClock::now();
        auto reply = recv_message(sock, std::chrono::milliseconds(60000));
        const double waited = seconds_since(wait_start);
        if (!reply) throw TransportError("server closed the connection");
        if (detection_checksum(*reply) != rec.checksum) {
          throw ProtocolError("image " + std::to_string(i) + ": server checksum mismatch");
        }
        rec.t_tail = cfg.tail_mode == TailMode::Sleep ? waited : server_cost;
      } catch (const TransportError& e) {
        throw TransportError("image " + std::to_string(i) + ": " + e.what());
      }
    }
    rec.total = rec.t_head + rec.t_uplink + rec.t_tail;
    log.records.push_back(rec);
  }
  return log;
}

void write_session_csv(std::ostream& os, const SessionLog& log) {
  const auto old_precision = os.precision(10);
  os << "image_id,filtered,bytes_sent,t_head,t_uplink,t_tail,total\n";
  for (const auto& r : log.records) {
    os << r.image_id << ',' << (r.filtered ? 1 : 0) << ',' << r.bytes_sent << ',' << r.t_head << ',' << r.t_uplink
       << ',' << r.t_tail << ',' << r.total << '\n';
  }
  os.precision(old_precision);
}

std::vector<LabeledImage> synthetic_images(std::size_t n, const Shape& shape, double p_empty, std::uint64_t seed) {
  if (!(p_empty >= 0.0 && p_empty <= 1.0)) throw RangeError("p_empty must be in [0, 1]");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution is_empty(p_empty);
  std::normal_distribution<float> act(0.0f, 1.0f);
  std::vector<LabeledImage> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<float> values(shape.numel());
    for (float& v : values) v = std::max(0.0f, act(rng));
    const bool empty = is_empty(rng);
    out.push_back({Tensor(shape, std::move(values)), empty});
  }
  return out;
}

}  // namespace splitwire::pipeline
