// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#include "splitwire/latency.hpp"

#include <cmath>
#include <ostream>

#include "splitwire/errors.hpp"

namespace splitwire::latency {

namespace {

void require_nonneg(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be finite and >= 0");
}

DelayBreakdown finish(DelayBreakdown d) {
  d.total = d.t_head + d.t_uplink + d.t_server + d.t_filter;
  return d;
}

}  // namespace

void ExecutionProfile::validate() const {
  require_nonneg(t_local, "t_local");
  require_nonneg(t_edge_full, "t_edge_full");
  require_nonneg(t_head, "t_head");
  require_nonneg(t_tail, "t_tail");
  require_nonneg(t_filter_extra, "t_filter_extra");
  require_nonneg(t_result_return, "t_result_return");
  if (t_head > t_local) throw ConfigError("t_head must not exceed t_local");
  if (t_tail > t_local) throw ConfigError("t_tail must not exceed t_local");
}

void ChannelModel::validate() const {
  if (!(rate_bps > 0.0) || !std::isfinite(rate_bps)) throw ConfigError("rate_bps must be > 0");
  require_nonneg(fixed_latency_s, "fixed_latency_s");
}

void PayloadSizes::validate() const {
  if (jpeg_bytes == 0 || bottleneck_bytes_8 == 0 || bottleneck_bytes_16 == 0 || bottleneck_bytes_32 == 0) {
    throw ConfigError("payload sizes must be > 0");
  }
  if (!(bottleneck_bytes_8 < bottleneck_bytes_16 && bottleneck_bytes_16 < bottleneck_bytes_32)) {
    throw ConfigError("bottleneck sizes must satisfy 8-bit < 16-bit < 32-bit");
  }
}

std::size_t PayloadSizes::bottleneck_bytes(codec::Width w) const {
  switch (w) {
    case codec::Width::k8:
      return bottleneck_bytes_8;
    case codec::Width::k16:
      return bottleneck_bytes_16;
    case codec::Width::k32:
      return bottleneck_bytes_32;
  }
  throw ArgumentError("unknown width");
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::LC:
      return "LC";
    case Strategy::PO:
      return "PO";
    case Strategy::SC:
      return "SC";
    case Strategy::SCNF:
      return "SCNF";
  }
  return "?";
}

Strategy strategy_from_string(const std::string& name) {
  for (Strategy s : kAllStrategies) {
    if (to_string(s) == name) return s;
  }
  throw ArgumentError("unknown strategy '" + name + "'");
}

double transfer_time(std::size_t bytes, const ChannelModel& ch) {
  return 8.0 * static_cast<double>(bytes) / ch.rate_bps + ch.fixed_latency_s;
}

DelayBreakdown total_delay(Strategy strategy, const ExecutionProfile& prof, const ChannelModel& ch,
                           const PayloadSizes& sizes, codec::Width width, double p_drop) {
  DelayBreakdown d;
  d.strategy = strategy;
  switch (strategy) {
    case Strategy::LC:
      d.t_head = prof.t_local;
      return finish(d);
    case Strategy::PO:
      d.t_uplink = transfer_time(sizes.jpeg_bytes, ch);
      d.t_server = prof.t_edge_full + prof.t_result_return;
      return finish(d);
    case Strategy::SC:
      d.t_head = prof.t_head;
      d.t_uplink = transfer_time(sizes.bottleneck_bytes(width), ch);
      d.t_server = prof.t_tail + prof.t_result_return;
      return finish(d);
    case Strategy::SCNF: {
      if (!(p_drop >= 0.0 && p_drop <= 1.0)) throw RangeError("p_drop must be in [0, 1]");
      const double keep = 1.0 - p_drop;
      d.t_head = prof.t_head;
      d.t_filter = prof.t_filter_extra;
      // Dropped images end on the device with an empty result.
      d.t_uplink = keep * transfer_time(sizes.bottleneck_bytes(width), ch);
      d.t_server = keep * (prof.t_tail + prof.t_result_return);
      return finish(d);
    }
  }
  throw ArgumentError("unknown strategy");
}

double gain_vs_local(const ExecutionProfile& prof, const ChannelModel& ch, const PayloadSizes& sizes,
                     codec::Width width, Strategy strategy, double p_drop) {
  return total_delay(Strategy::LC, prof, ch, sizes, width).total /
         total_delay(strategy, prof, ch, sizes, width, p_drop).total;
}

double gain_vs_offload(const ExecutionProfile& prof, const ChannelModel& ch, const PayloadSizes& sizes,
                       codec::Width width, Strategy strategy, double p_drop) {
  return total_delay(Strategy::PO, prof, ch, sizes, width).total /
         total_delay(strategy, prof, ch, sizes, width, p_drop).total;
}

std::vector<SweepRow> sweep(const ExecutionProfile& prof, const PayloadSizes& sizes, codec::Width width,
                            std::span<const double> rates_bps, double p_drop, double fixed_latency_s) {
  if (rates_bps.empty()) throw ArgumentError("sweep: no rates");
  for (std::size_t i = 0; i < rates_bps.size(); ++i) {
    if (!(rates_bps[i] > 0.0)) throw ArgumentError("sweep: rates must be > 0");
    if (i > 0 && !(rates_bps[i] > rates_bps[i - 1])) throw ArgumentError("sweep: rates must be ascending");
  }
  std::vector<SweepRow> rows;
  rows.reserve(rates_bps.size() * std::size(kAllStrategies));
  for (double rate : rates_bps) {
    const ChannelModel ch{rate, fixed_latency_s};
    const double lc = total_delay(Strategy::LC, prof, ch, sizes, width).total;
    const double po = total_delay(Strategy::PO, prof, ch, sizes, width).total;
    for (Strategy s : kAllStrategies) {
      SweepRow row;
      row.rate_bps = rate;
      row.delay = total_delay(s, prof, ch, sizes, width, p_drop);
      row.gain_vs_local = lc / row.delay.total;
      row.gain_vs_offload = po / row.delay.total;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
  const auto old_precision = os.precision(10);
  os << "rate_mbps,strategy,t_head,t_uplink,t_server,t_filter,total_s,gain_vs_local,gain_vs_offload\n";
  for (const auto& r : rows) {
    os << r.rate_bps / 1e6 << ',' << to_string(r.delay.strategy) << ',' << r.delay.t_head << ',' << r.delay.t_uplink
       << ',' << r.delay.t_server << ',' << r.delay.t_filter << ',' << r.delay.total << ',' << r.gain_vs_local << ','
       << r.gain_vs_offload << '\n';
  }
  os.precision(old_precision);
}

double crossover_rate(const ExecutionProfile& prof, const PayloadSizes& sizes, codec::Width width, Strategy a,
                      Strategy b, RateBracket bracket, double p_drop, double fixed_latency_s) {
  if (!(bracket.lo_bps > 0.0 && bracket.hi_bps > bracket.lo_bps)) {
    throw ArgumentError("crossover_rate: bracket must satisfy 0 < lo < hi");
  }
  auto diff = [&](double rate) {
    const ChannelModel ch{rate, fixed_latency_s};
    return total_delay(a, prof, ch, sizes, width, p_drop).total - total_delay(b, prof, ch, sizes, width, p_drop).total;
  };
  double lo = bracket.lo_bps;
  double hi = bracket.hi_bps;
  double f_lo = diff(lo);
  const double f_hi = diff(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw NoCrossoverError("no crossover between " + to_string(a) + " and " + to_string(b) + " in [" +
                           std::to_string(lo) + ", " + std::to_string(hi) + "] bps");
  }
  constexpr double kDelayTol = 1e-6;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = diff(mid);
    if (std::fabs(f_mid) < kDelayTol && (hi - lo) < 1e-9 * hi) return mid;
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double po_sc_crossover_closed_form(const ExecutionProfile& prof, const PayloadSizes& sizes, codec::Width width) {
  const double saved_bits = 8.0 * (static_cast<double>(sizes.jpeg_bytes) - static_cast<double>(sizes.bottleneck_bytes(width)));
  const double extra_compute = prof.t_head + prof.t_tail - prof.t_edge_full;
  if (!(extra_compute > 0.0) || !(saved_bits > 0.0)) {
    throw NoCrossoverError("split computing never crosses pure offloading for this profile");
  }
  return saved_bits / extra_compute;
}

}  // namespace splitwire::latency
