// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "splitwire/filter.hpp"
#include "splitwire/latency.hpp"
#include "splitwire/netspec.hpp"
#include "splitwire/server.hpp"

namespace splitwire::cli {

/// Settings for client/server runs that are not part of the delay model.
struct SessionSettings {
  Shape tensor_shape{3, 32, 32};
  codec::Width width = codec::Width::k8;
  pipeline::TailMode tail_mode = pipeline::TailMode::Virtual;
  double idle_timeout_s = 30.0;
};

/// One JSON document fully describing an experiment.
///
/// {
///   "profile":  { t_local, t_edge_full, t_head, t_tail, t_filter_extra, t_result_return? },
///   "channel":  { rate_bps, fixed_latency_s? },
///   "sizes":    { jpeg_bytes, bottleneck_bytes_8, bottleneck_bytes_16, bottleneck_bytes_32 },
///   "filter":   { threshold?, p_empty?, mean_empty?, mean_nonempty?, sigma_empty?, sigma_nonempty? },
///   "netspecs": { "<name>": { "layers": [ {kind, oc, k, s, p, oh, ow, in_features, out_features, bottleneck}, ... ] } },
///   "session":  { tensor_shape?: [..], width?: 8|16|32, tail_mode?: "virtual"|"sleep", idle_timeout_s? },
///   "seed": integer
/// }
///
/// Keys starting with '_' are ignored (used for notes).
struct Config {
  latency::ExecutionProfile profile;
  latency::ChannelModel channel;
  latency::PayloadSizes sizes;
  pipeline::FilterModel filter;
  std::map<std::string, netspec::NetworkSpec> netspecs;
  SessionSettings session;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Throws ConfigError with a readable diagnostic on any schema or invariant violation.
Config parse_config(const nlohmann::json& doc);
Config load_config(const std::filesystem::path& path);
nlohmann::json to_json(const Config& cfg);

}  // namespace splitwire::cli
