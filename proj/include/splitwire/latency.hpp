// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "splitwire/codec.hpp"

namespace splitwire::latency {

/// Timing inputs, all in seconds.
struct ExecutionProfile {
  double t_local = 0.0;         // full model on the mobile device
  double t_edge_full = 0.0;     // full model on the edge server
  double t_head = 0.0;          // head (up to the bottleneck) on the mobile device
  double t_tail = 0.0;          // tail on the edge server
  double t_filter_extra = 0.0;  // extra head-side cost of the prefilter branch
  double t_result_return = 0.0; // downlink of the detection result; zero by default

  void validate() const;
};

struct ChannelModel {
  double rate_bps = 5e6;
  double fixed_latency_s = 0.0;

  void validate() const;
};

/// Message sizes in bytes (framing header included for bottleneck sizes).
struct PayloadSizes {
  std::size_t jpeg_bytes = 0;
  std::size_t bottleneck_bytes_8 = 0;
  std::size_t bottleneck_bytes_16 = 0;
  std::size_t bottleneck_bytes_32 = 0;

  void validate() const;
  std::size_t bottleneck_bytes(codec::Width w) const;
};

enum class Strategy { LC, PO, SC, SCNF };

inline constexpr Strategy kAllStrategies[] = {Strategy::LC, Strategy::PO, Strategy::SC, Strategy::SCNF};

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& name);

struct DelayBreakdown {
  Strategy strategy = Strategy::LC;
  double t_head = 0.0;    // on-device compute (full model for LC)
  double t_uplink = 0.0;  // expected link time
  double t_server = 0.0;  // expected edge compute (+ result return)
  double t_filter = 0.0;
  double total = 0.0;     // exactly t_head + t_uplink + t_server + t_filter
};

/// 8 * bytes / rate + fixed latency.
double transfer_time(std::size_t bytes, const ChannelModel& ch);

/// Capture-to-output delay. p_drop is only read for SCNF, where the result is
/// the expectation over the prefilter outcome.
DelayBreakdown total_delay(Strategy strategy, const ExecutionProfile& prof, const ChannelModel& ch,
                           const PayloadSizes& sizes, codec::Width width, double p_drop = 0.0);

/// total(LC) / total(strategy)
double gain_vs_local(const ExecutionProfile& prof, const ChannelModel& ch, const PayloadSizes& sizes,
                     codec::Width width, Strategy strategy, double p_drop = 0.0);
/// total(PO) / total(strategy)
double gain_vs_offload(const ExecutionProfile& prof, const ChannelModel& ch, const PayloadSizes& sizes,
                       codec::Width width, Strategy strategy, double p_drop = 0.0);

struct SweepRow {
  double rate_bps = 0.0;
  DelayBreakdown delay;
  double gain_vs_local = 0.0;
  double gain_vs_offload = 0.0;
};

/// One row per (rate, strategy), rates in the given (ascending) order.
std::vector<SweepRow> sweep(const ExecutionProfile& prof, const PayloadSizes& sizes, codec::Width width,
                            std::span<const double> rates_bps, double p_drop, double fixed_latency_s = 0.0);

/// Header: rate_mbps,strategy,t_head,t_uplink,t_server,t_filter,total_s,gain_vs_local,gain_vs_offload
void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows);

struct RateBracket {
  double lo_bps = 0.0;
  double hi_bps = 0.0;
};

/// Rate at which total(a) == total(b), by bisection on [lo, hi] until the
/// delay difference is below 1e-6 s. Throws NoCrossoverError when the
/// difference has the same sign at both ends.
double crossover_rate(const ExecutionProfile& prof, const PayloadSizes& sizes, codec::Width width, Strategy a,
                      Strategy b, RateBracket bracket, double p_drop = 0.0, double fixed_latency_s = 0.0);

/// Closed form for PO vs SC: 8 (jpeg - bottleneck) / (t_head + t_tail - t_edge_full).
/// Throws NoCrossoverError when the denominator or numerator is not positive.
double po_sc_crossover_closed_form(const ExecutionProfile& prof, const PayloadSizes& sizes, codec::Width width);

}  // namespace splitwire::latency
