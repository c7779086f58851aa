// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

// splitwire: command-line front end.
//
// Exit codes: 0 success, 2 usage or config, 3 data, 4 transport.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "splitwire/codec.hpp"
#include "splitwire/config.hpp"
#include "splitwire/distill.hpp"
#include "splitwire/errors.hpp"
#include "splitwire/filter.hpp"
#include "splitwire/latency.hpp"
#include "splitwire/netspec.hpp"
#include "splitwire/server.hpp"
#include "splitwire/session.hpp"
#include "splitwire/wire.hpp"

namespace {

using namespace splitwire;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitTransport = 4;

cli::Config resolve_config(const std::string& flag) {
  std::string path = flag;
  if (path.empty()) {
    const char* env = std::getenv("SPLITWIRE_CONFIG");
    if (env == nullptr || *env == '\0') throw ConfigError("no --config given and SPLITWIRE_CONFIG is unset");
    path = env;
  }
  return cli::load_config(path);
}

/// Runs `fn` with an ostream bound to `path`, or stdout for "-".
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  fn(out);
  if (!out) throw ConfigError("write to '" + path + "' failed");
}

/// "a,b,c" or "start:stop:step" (inclusive), in Mbps; returns bits per second.
std::vector<double> parse_rates(const std::string& text) {
  std::vector<double> mbps;
  auto to_double = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ArgumentError("bad rate '" + s + "' in --rates");
    }
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw ArgumentError("--rates range must be start:stop:step");
    const double start = to_double(parts[0]);
    const double stop = to_double(parts[1]);
    const double step = to_double(parts[2]);
    if (!(step > 0.0) || stop < start) throw ArgumentError("--rates range needs step > 0 and stop >= start");
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i) mbps.push_back(start + static_cast<double>(i) * step);
  } else {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) mbps.push_back(to_double(p));
  }
  if (mbps.empty()) throw ArgumentError("--rates is empty");
  std::vector<double> bps;
  for (double r : mbps) {
    if (!(r > 0.0)) throw ArgumentError("--rates entries must be > 0");
    bps.push_back(r * 1e6);
  }
  return bps;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("write to '" + path + "' failed");
}

codec::QuantizedTensor read_tensor_file(const std::string& path) {
  return pipeline::to_quantized(pipeline::decode_message(read_file(path)));
}

void print_size(const codec::SizeReport& r) {
  std::printf("payload_bytes=%zu header_bytes=%zu total_bytes=%zu\n", r.payload_bytes, r.header_bytes,
              r.total_bytes);
}

// sweep ----------------------------------------------------------------------

struct SweepArgs {
  std::string config;
  std::string rates = "0.5:10:0.5";
  int width = 8;
  std::string out = "-";
};

void cmd_sweep(const SweepArgs& a) {
  const cli::Config cfg = resolve_config(a.config);
  const auto rates = parse_rates(a.rates);
  const auto width = codec::width_from_bits(a.width);
  const double p_drop = cfg.filter.expected_drop_rate();
  const auto rows = latency::sweep(cfg.profile, cfg.sizes, width, rates, p_drop, cfg.channel.fixed_latency_s);
  with_output(a.out, [&](std::ostream& os) { latency::write_sweep_csv(os, rows); });

  std::ostream& info = a.out == "-" ? std::cerr : std::cout;
  info << "rows=" << rows.size() << " p_drop=" << p_drop << "\n";
  try {
    const double r = latency::crossover_rate(cfg.profile, cfg.sizes, width, latency::Strategy::PO,
                                             latency::Strategy::SC, {rates.front(), rates.back()}, p_drop,
                                             cfg.channel.fixed_latency_s);
    info << "crossover_sc_vs_po_mbps=" << r / 1e6 << "\n";
  } catch (const NoCrossoverError&) {
    info << "crossover_sc_vs_po_mbps=none\n";
  }
}

// codec ----------------------------------------------------------------------

struct CodecArgs {
  std::string in;
  std::string out;
  int width = 8;
  std::string mode = "affine";
  std::string reference;
  std::string shape = "3x32x32";
  std::uint64_t seed = 0;
  double lo = -1.0;
  double hi = 1.0;
};

void cmd_codec_quantize(const CodecArgs& a) {
  const Tensor t = codec::dequantize(read_tensor_file(a.in));
  const auto mode = a.mode == "symmetric" ? codec::QuantMode::Symmetric : codec::QuantMode::Affine;
  const auto q = codec::quantize(t, codec::width_from_bits(a.width), mode);
  write_file(a.out, pipeline::encode_message(pipeline::to_message(q)));
  std::printf("shape=%s width=%d scale=%.9g zero_point=%d saturated=%d\n", q.shape.str().c_str(), a.width,
              static_cast<double>(q.scale), q.zero_point, q.saturated ? 1 : 0);
  print_size(codec::data_size(q));
}

void cmd_codec_dequantize(const CodecArgs& a) {
  const auto q = read_tensor_file(a.in);
  const Tensor t = codec::dequantize(q);
  write_file(a.out, pipeline::encode_message(pipeline::to_message(codec::passthrough32(t))));
  std::printf("shape=%s width=%d\n", t.shape().str().c_str(), static_cast<int>(q.width));
  if (!a.reference.empty()) {
    const Tensor ref = codec::dequantize(read_tensor_file(a.reference));
    if (ref.shape() != t.shape()) throw ShapeError("reference shape " + ref.shape().str() + " differs");
    double max_err = 0.0;
    for (std::size_t i = 0; i < t.numel(); ++i) {
      max_err = std::max(max_err, std::abs(static_cast<double>(t[i]) - static_cast<double>(ref[i])));
    }
    std::printf("max_abs_error=%.9g", max_err);
    if (q.width == codec::Width::k8) std::printf(" half_scale=%.9g", static_cast<double>(q.scale) / 2.0);
    std::printf("\n");
  }
}

void cmd_codec_random(const CodecArgs& a) {
  const Tensor t = random_fill(Shape::parse(a.shape), a.seed, static_cast<float>(a.lo), static_cast<float>(a.hi));
  const auto q = codec::passthrough32(t);
  write_file(a.out, pipeline::encode_message(pipeline::to_message(q)));
  std::printf("shape=%s\n", t.shape().str().c_str());
  print_size(codec::data_size(q));
}

// netspec --------------------------------------------------------------------

struct NetspecArgs {
  std::string spec;
  std::string input = "3x874x1044";
};

netspec::NetworkSpec resolve_netspec(const std::string& name_or_path) {
  for (const auto& n : netspec::fixture_names()) {
    if (n == name_or_path) return netspec::fixture(n);
  }
  std::ifstream in(name_or_path);
  if (!in) throw ConfigError("'" + name_or_path + "' is neither a fixture name nor a readable file");
  try {
    auto net = nlohmann::json::parse(in).get<netspec::NetworkSpec>();
    if (net.name.empty()) net.name = name_or_path;
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("netspec '" + name_or_path + "': " + e.what());
  }
}

void cmd_netspec(const NetspecArgs& a) {
  const auto net = resolve_netspec(a.spec);
  const Shape in = Shape::parse(a.input);
  const auto tr = netspec::trace(net, in);
  std::printf("network=%s input=%s\n", net.name.c_str(), in.str().c_str());
  std::printf("%-5s %-18s %-16s %s\n", "index", "kind", "output", "params");
  Shape prev = in;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    std::printf("%-5zu %-18s %-16s %llu%s\n", i, netspec::to_string(l.kind).c_str(), tr.outputs[i].str().c_str(),
                static_cast<unsigned long long>(netspec::layer_params(l, prev)), l.bottleneck ? "  <- bottleneck" : "");
    prev = tr.outputs[i];
  }
  std::printf("output=%s\n", tr.output().str().c_str());
  std::printf("params=%llu\n", static_cast<unsigned long long>(tr.params));
  if (tr.bottleneck) {
    std::printf("bottleneck=%s ratio=%.4f\n", tr.bottleneck->str().c_str(), netspec::tensor_ratio(*tr.bottleneck, in));
  }
}

// distill --------------------------------------------------------------------

struct DistillArgs {
  std::string fixture = "linear_full";
  std::optional<int> epochs;
  std::uint64_t seed = 7;
  std::string out = "-";
};

void cmd_distill(const DistillArgs& a) {
  auto fx = distill::toy_fixture(a.fixture, a.seed);
  if (a.epochs) fx.cfg.epochs = *a.epochs;
  const auto res = distill::train_toy(fx.teacher, fx.student, fx.dataset, fx.cfg);
  with_output(a.out, [&](std::ostream& os) { distill::write_history_csv(os, res.history); });
  std::ostream& info = a.out == "-" ? std::cerr : std::cout;
  info.precision(9);
  info << "fixture=" << fx.name << " epochs=" << fx.cfg.epochs << " final_loss=" << res.final_loss;
  if (fx.teacher_map) {
    const double bound = distill::eckart_young_bound(*fx.teacher_map, distill::samples_matrix(fx.dataset),
                                                     fx.bottleneck_width);
    info << " bound=" << bound;
  }
  info << "\n";
}

// serve / client -------------------------------------------------------------

struct ServeArgs {
  std::string addr = "127.0.0.1:5555";
  std::string config;
  std::optional<std::string> tail_mode;
  std::optional<double> duration_s;
};

pipeline::TailMode parse_tail_mode(const std::string& s) {
  if (s == "virtual") return pipeline::TailMode::Virtual;
  if (s == "sleep") return pipeline::TailMode::Sleep;
  throw ArgumentError("tail mode must be 'virtual' or 'sleep'");
}

void cmd_serve(const ServeArgs& a) {
  const cli::Config cfg = resolve_config(a.config);
  pipeline::ServerOptions opts;
  opts.bind = pipeline::Endpoint::parse(a.addr);
  opts.tail_seconds = cfg.profile.t_tail + cfg.profile.t_result_return;
  opts.full_model_seconds = cfg.profile.t_edge_full + cfg.profile.t_result_return;
  opts.tail_mode = a.tail_mode ? parse_tail_mode(*a.tail_mode) : cfg.session.tail_mode;
  opts.idle_timeout = std::chrono::milliseconds(static_cast<long long>(cfg.session.idle_timeout_s * 1000.0));
  pipeline::Server server(opts);
  std::fprintf(stderr, "listening on %s:%u\n", opts.bind.host.c_str(), static_cast<unsigned>(server.port()));
  if (!a.duration_s) {
    server.serve_forever();
    return;
  }
  server.start();
  std::this_thread::sleep_for(std::chrono::duration<double>(*a.duration_s));
  server.stop();
  const auto st = server.stats();
  std::fprintf(stderr, "connections=%llu frames=%llu protocol_errors=%llu\n",
               static_cast<unsigned long long>(st.connections), static_cast<unsigned long long>(st.frames),
               static_cast<unsigned long long>(st.protocol_errors));
}

struct ClientArgs {
  std::string addr = "127.0.0.1:5555";
  std::string config;
  std::size_t n = 10;
  std::string out = "-";
  std::optional<int> width;
  std::optional<std::uint64_t> seed;
  bool simulate = false;
  bool no_filter = false;
  bool spawn_server = false;
};

void cmd_client(const ClientArgs& a) {
  const cli::Config cfg = resolve_config(a.config);
  const std::uint64_t seed = a.seed.value_or(cfg.seed);

  pipeline::SessionConfig sc;
  sc.profile = cfg.profile;
  sc.channel = cfg.channel;
  sc.filter = cfg.filter;
  sc.use_filter = !a.no_filter;
  sc.width = a.width ? codec::width_from_bits(*a.width) : cfg.session.width;
  sc.mode = a.simulate ? pipeline::SessionMode::Simulated : pipeline::SessionMode::Socket;
  sc.server = pipeline::Endpoint::parse(a.addr);
  sc.tail_mode = cfg.session.tail_mode;
  sc.seed = seed;

  std::optional<pipeline::Server> local;
  if (a.spawn_server && !a.simulate) {
    pipeline::ServerOptions opts;
    opts.bind = sc.server;
    opts.tail_seconds = cfg.profile.t_tail + cfg.profile.t_result_return;
    opts.full_model_seconds = cfg.profile.t_edge_full + cfg.profile.t_result_return;
    opts.tail_mode = sc.tail_mode;
    opts.log = [](const std::string&) {};
    local.emplace(opts);
    local->start();
    sc.server.port = local->port();
  }

  const auto images = pipeline::synthetic_images(a.n, cfg.session.tensor_shape, cfg.filter.p_empty, seed);
  const auto log = pipeline::run_session(images, sc);
  if (local) local->stop();

  with_output(a.out, [&](std::ostream& os) { pipeline::write_session_csv(os, log); });
  std::ostream& info = a.out == "-" ? std::cerr : std::cout;
  info.precision(9);
  info << "images=" << log.records.size() << " dropped=" << log.dropped() << " bytes=" << log.total_bytes()
       << " mean_total_s=" << log.mean_total() << "\n";
}

// filter-metrics -------------------------------------------------------------

struct FilterArgs {
  std::string config;
  std::size_t n = 100000;
  std::uint64_t seed = 0;
  std::optional<double> threshold;
};

void cmd_filter_metrics(const FilterArgs& a) {
  cli::Config cfg = resolve_config(a.config);
  if (a.threshold) cfg.filter.threshold = *a.threshold;
  cfg.filter.validate();
  const auto m = pipeline::gate_metrics(cfg.filter, a.n, a.seed);
  std::printf("n=%zu n_empty=%zu\n", m.n, m.n_empty);
  std::printf("drop_rate=%.6f\n", m.drop_rate);
  std::printf("recall_nonempty=%.6f\n", m.recall_nonempty);
  std::printf("false_negative_rate=%.6f\n", m.false_negative_rate);
  std::printf("empty_drop_rate=%.6f\n", m.empty_drop_rate);
  std::printf("auc=%.6f analytic_auc=%.6f\n", m.empirical_auc, cfg.filter.analytic_auc());
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const TransportError*>(&e) != nullptr) return kExitTransport;
  if (dynamic_cast<const ConfigError*>(&e) != nullptr || dynamic_cast<const ArgumentError*>(&e) != nullptr) {
    return kExitUsage;
  }
  return kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"splitwire: split-computing latency, codec and pipeline tools"};
  app.require_subcommand(1);

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "delay and gain per strategy over a list of link rates");
  sweep->add_option("--config", sweep_args.config, "config JSON (default: $SPLITWIRE_CONFIG)");
  sweep->add_option("--rates", sweep_args.rates, "Mbps, 'a,b,c' or 'start:stop:step'")->capture_default_str();
  sweep->add_option("--width", sweep_args.width, "bottleneck bit width")->check(CLI::IsMember({8, 16, 32}))
      ->capture_default_str();
  sweep->add_option("--out", sweep_args.out, "CSV path, '-' for stdout")->capture_default_str();

  CodecArgs codec_args;
  auto* codec_cmd = app.add_subcommand("codec", "tensor file conversion");
  codec_cmd->require_subcommand(1);
  auto* quant = codec_cmd->add_subcommand("quantize", "float tensor file -> 8 or 16 bit tensor file");
  quant->add_option("--in", codec_args.in)->required();
  quant->add_option("--out", codec_args.out)->required();
  quant->add_option("--width", codec_args.width)->check(CLI::IsMember({8, 16}))->capture_default_str();
  quant->add_option("--mode", codec_args.mode, "8-bit mapping")->check(CLI::IsMember({"affine", "symmetric"}))
      ->capture_default_str();
  auto* dequant = codec_cmd->add_subcommand("dequantize", "tensor file -> 32-bit float tensor file");
  dequant->add_option("--in", codec_args.in)->required();
  dequant->add_option("--out", codec_args.out)->required();
  dequant->add_option("--reference", codec_args.reference, "original float tensor; reports max error");
  auto* rnd = codec_cmd->add_subcommand("random", "write a seeded uniform float tensor file");
  rnd->add_option("--shape", codec_args.shape, "CxHxW")->capture_default_str();
  rnd->add_option("--seed", codec_args.seed)->capture_default_str();
  rnd->add_option("--lo", codec_args.lo)->capture_default_str();
  rnd->add_option("--hi", codec_args.hi)->capture_default_str();
  rnd->add_option("--out", codec_args.out)->required();

  NetspecArgs netspec_args;
  auto* ns = app.add_subcommand("netspec", "shape trace, parameter count and bottleneck ratio");
  ns->add_option("--spec", netspec_args.spec, "fixture name or NetworkSpec JSON path")->required();
  ns->add_option("--input", netspec_args.input, "CxHxW")->capture_default_str();

  DistillArgs distill_args;
  auto* dist = app.add_subcommand("distill", "train a toy student head against its frozen teacher");
  dist->add_option("--fixture", distill_args.fixture)->check(CLI::IsMember(distill::toy_fixture_names()))
      ->capture_default_str();
  dist->add_option("--epochs", distill_args.epochs, "default: the fixture's schedule")->check(CLI::PositiveNumber);
  dist->add_option("--seed", distill_args.seed)->capture_default_str();
  dist->add_option("--out", distill_args.out, "CSV path, '-' for stdout")->capture_default_str();

  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve", "run the edge server");
  serve->add_option("--addr", serve_args.addr, "HOST:PORT")->capture_default_str();
  serve->add_option("--config", serve_args.config, "config JSON (default: $SPLITWIRE_CONFIG)");
  serve->add_option("--tail-mode", serve_args.tail_mode)->check(CLI::IsMember({"virtual", "sleep"}));
  serve->add_option("--duration", serve_args.duration_s, "stop after this many seconds")->check(CLI::PositiveNumber);

  ClientArgs client_args;
  auto* client = app.add_subcommand("client", "run a capture session against a server");
  client->add_option("--addr", client_args.addr, "HOST:PORT")->capture_default_str();
  client->add_option("--config", client_args.config, "config JSON (default: $SPLITWIRE_CONFIG)");
  client->add_option("--n", client_args.n, "number of images")->check(CLI::PositiveNumber)->capture_default_str();
  client->add_option("--out", client_args.out, "CSV path, '-' for stdout")->capture_default_str();
  client->add_option("--width", client_args.width)->check(CLI::IsMember({8, 16, 32}));
  client->add_option("--seed", client_args.seed, "default: config seed");
  client->add_flag("--simulate", client_args.simulate, "no sockets; model the link analytically");
  client->add_flag("--no-filter", client_args.no_filter, "split computing without the prefilter");
  client->add_flag("--spawn-server", client_args.spawn_server, "start an in-process server on --addr");

  FilterArgs filter_args;
  auto* filt = app.add_subcommand("filter-metrics", "Monte Carlo prefilter gate metrics");
  filt->add_option("--config", filter_args.config, "config JSON (default: $SPLITWIRE_CONFIG)");
  filt->add_option("--n", filter_args.n)->check(CLI::PositiveNumber)->capture_default_str();
  filt->add_option("--seed", filter_args.seed)->capture_default_str();
  filt->add_option("--threshold", filter_args.threshold, "override the config threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sweep) cmd_sweep(sweep_args);
    if (*quant) cmd_codec_quantize(codec_args);
    if (*dequant) cmd_codec_dequantize(codec_args);
    if (*rnd) cmd_codec_random(codec_args);
    if (*ns) cmd_netspec(netspec_args);
    if (*dist) cmd_distill(distill_args);
    if (*serve) cmd_serve(serve_args);
    if (*client) cmd_client(client_args);
    if (*filt) cmd_filter_metrics(filter_args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  }
  return kExitOk;
}
