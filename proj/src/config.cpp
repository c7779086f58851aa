// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#include "splitwire/config.hpp"

#include <fstream>

#include "splitwire/errors.hpp"

namespace splitwire::cli {

namespace {

using nlohmann::json;

const json& section(const json& doc, const char* name) {
  if (!doc.contains(name)) throw ConfigError(std::string("missing section '") + name + "'");
  const json& s = doc.at(name);
  if (!s.is_object()) throw ConfigError(std::string("section '") + name + "' must be an object");
  return s;
}

double number(const json& s, const char* section_name, const char* key) {
  if (!s.contains(key)) throw ConfigError(std::string(section_name) + "." + key + " is required");
  const json& v = s.at(key);
  if (!v.is_number()) throw ConfigError(std::string(section_name) + "." + key + " must be a number");
  return v.get<double>();
}

double number_or(const json& s, const char* section_name, const char* key, double fallback) {
  return s.contains(key) ? number(s, section_name, key) : fallback;
}

std::size_t count(const json& s, const char* section_name, const char* key) {
  if (!s.contains(key)) throw ConfigError(std::string(section_name) + "." + key + " is required");
  const json& v = s.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw ConfigError(std::string(section_name) + "." + key + " must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

void reject_unknown(const json& s, const char* section_name, std::initializer_list<const char*> known) {
  for (const auto& [key, _] : s.items()) {
    if (!key.empty() && key[0] == '_') continue;
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(std::string("unknown key '") + key + "' in " + section_name);
  }
}

}  // namespace

void Config::validate() const {
  profile.validate();
  channel.validate();
  sizes.validate();
  filter.validate();
  if (session.idle_timeout_s <= 0.0) throw ConfigError("session.idle_timeout_s must be > 0");
  for (const auto& [name, net] : netspecs) {
    try {
      net.validate();
    } catch (const Error& e) {
      throw ConfigError("netspec '" + name + "': " + e.what());
    }
  }
}

Config parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(doc, "config", {"profile", "channel", "sizes", "filter", "netspecs", "session", "seed"});
  Config cfg;

  const json& p = section(doc, "profile");
  reject_unknown(p, "profile", {"t_local", "t_edge_full", "t_head", "t_tail", "t_filter_extra", "t_result_return"});
  cfg.profile.t_local = number(p, "profile", "t_local");
  cfg.profile.t_edge_full = number(p, "profile", "t_edge_full");
  cfg.profile.t_head = number(p, "profile", "t_head");
  cfg.profile.t_tail = number(p, "profile", "t_tail");
  cfg.profile.t_filter_extra = number_or(p, "profile", "t_filter_extra", 0.0);
  cfg.profile.t_result_return = number_or(p, "profile", "t_result_return", 0.0);

  const json& c = section(doc, "channel");
  reject_unknown(c, "channel", {"rate_bps", "fixed_latency_s"});
  cfg.channel.rate_bps = number(c, "channel", "rate_bps");
  cfg.channel.fixed_latency_s = number_or(c, "channel", "fixed_latency_s", 0.0);

  const json& s = section(doc, "sizes");
  reject_unknown(s, "sizes", {"jpeg_bytes", "bottleneck_bytes_8", "bottleneck_bytes_16", "bottleneck_bytes_32"});
  cfg.sizes.jpeg_bytes = count(s, "sizes", "jpeg_bytes");
  cfg.sizes.bottleneck_bytes_8 = count(s, "sizes", "bottleneck_bytes_8");
  cfg.sizes.bottleneck_bytes_16 = count(s, "sizes", "bottleneck_bytes_16");
  cfg.sizes.bottleneck_bytes_32 = count(s, "sizes", "bottleneck_bytes_32");

  if (doc.contains("filter")) {
    const json& f = section(doc, "filter");
    reject_unknown(f, "filter", {"threshold", "p_empty", "mean_empty", "mean_nonempty", "sigma_empty", "sigma_nonempty"});
    pipeline::FilterModel d;
    cfg.filter.threshold = number_or(f, "filter", "threshold", d.threshold);
    cfg.filter.p_empty = number_or(f, "filter", "p_empty", d.p_empty);
    cfg.filter.mean_empty = number_or(f, "filter", "mean_empty", d.mean_empty);
    cfg.filter.mean_nonempty = number_or(f, "filter", "mean_nonempty", d.mean_nonempty);
    cfg.filter.sigma_empty = number_or(f, "filter", "sigma_empty", d.sigma_empty);
    cfg.filter.sigma_nonempty = number_or(f, "filter", "sigma_nonempty", d.sigma_nonempty);
  }

  if (doc.contains("netspecs")) {
    const json& n = section(doc, "netspecs");
    for (const auto& [name, spec] : n.items()) {
      try {
        auto net = spec.get<netspec::NetworkSpec>();
        if (net.name.empty()) net.name = name;
        cfg.netspecs.emplace(name, std::move(net));
      } catch (const json::exception& e) {
        throw ConfigError("netspec '" + name + "': " + e.what());
      } catch (const Error& e) {
        throw ConfigError("netspec '" + name + "': " + e.what());
      }
    }
  }

  if (doc.contains("session")) {
    const json& ss = section(doc, "session");
    reject_unknown(ss, "session", {"tensor_shape", "width", "tail_mode", "idle_timeout_s"});
    try {
      if (ss.contains("tensor_shape")) cfg.session.tensor_shape = Shape(ss.at("tensor_shape").get<std::vector<std::size_t>>());
      if (ss.contains("width")) cfg.session.width = codec::width_from_bits(ss.at("width").get<int>());
    } catch (const json::exception& e) {
      throw ConfigError(std::string("session: ") + e.what());
    } catch (const Error& e) {
      throw ConfigError(std::string("session: ") + e.what());
    }
    if (ss.contains("tail_mode")) {
      const auto mode = ss.at("tail_mode").get<std::string>();
      if (mode == "virtual") {
        cfg.session.tail_mode = pipeline::TailMode::Virtual;
      } else if (mode == "sleep") {
        cfg.session.tail_mode = pipeline::TailMode::Sleep;
      } else {
        throw ConfigError("session.tail_mode must be 'virtual' or 'sleep'");
      }
    }
    cfg.session.idle_timeout_s = number_or(ss, "session", "idle_timeout_s", cfg.session.idle_timeout_s);
  }

  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_integer()) throw ConfigError("seed must be an integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }

  cfg.validate();
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

nlohmann::json to_json(const Config& cfg) {
  json doc;
  doc["profile"] = {{"t_local", cfg.profile.t_local},
                    {"t_edge_full", cfg.profile.t_edge_full},
                    {"t_head", cfg.profile.t_head},
                    {"t_tail", cfg.profile.t_tail},
                    {"t_filter_extra", cfg.profile.t_filter_extra},
                    {"t_result_return", cfg.profile.t_result_return}};
  doc["channel"] = {{"rate_bps", cfg.channel.rate_bps}, {"fixed_latency_s", cfg.channel.fixed_latency_s}};
  doc["sizes"] = {{"jpeg_bytes", cfg.sizes.jpeg_bytes},
                  {"bottleneck_bytes_8", cfg.sizes.bottleneck_bytes_8},
                  {"bottleneck_bytes_16", cfg.sizes.bottleneck_bytes_16},
                  {"bottleneck_bytes_32", cfg.sizes.bottleneck_bytes_32}};
  doc["filter"] = {{"threshold", cfg.filter.threshold},
                   {"p_empty", cfg.filter.p_empty},
                   {"mean_empty", cfg.filter.mean_empty},
                   {"mean_nonempty", cfg.filter.mean_nonempty},
                   {"sigma_empty", cfg.filter.sigma_empty},
                   {"sigma_nonempty", cfg.filter.sigma_nonempty}};
  json nets = json::object();
  for (const auto& [name, net] : cfg.netspecs) nets[name] = net;
  doc["netspecs"] = nets;
  doc["session"] = {{"tensor_shape", cfg.session.tensor_shape.dims()},
                    {"width", static_cast<int>(cfg.session.width)},
                    {"tail_mode", cfg.session.tail_mode == pipeline::TailMode::Sleep ? "sleep" : "virtual"},
                    {"idle_timeout_s", cfg.session.idle_timeout_s}};
  doc["seed"] = cfg.seed;
  return doc;
}

}  // namespace splitwire::cli
