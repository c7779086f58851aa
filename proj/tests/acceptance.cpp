// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances and runtime limits are fixed below.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

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

using namespace splitwire;

namespace {

const std::string kConfigPath = std::string(SPLITWIRE_SOURCE_DIR) + "/configs/keypoint_rcnn_rn50.json";
const Shape kKeypointInput{3, 874, 1044};

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Runs one criterion, enforcing its runtime limit (seconds; <= 0 for none).
bool run(int id, double limit_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (limit_s > 0 && secs >= limit_s) {
    out.pass = false;
    out.detail += " (runtime limit exceeded)";
  }
  std::printf("criterion %d %s %.3fs %s\n", id, out.pass ? "PASS" : "FAIL", secs, out.detail.c_str());
  std::fflush(stdout);
  return out.pass;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Shape keypoint_bottleneck() { return *netspec::trace(netspec::student_l1(), kKeypointInput).bottleneck; }

// 1. Size algebra against a JPEG reference solved from the 32-bit ratio 2.56.
Outcome size_algebra() {
  const Shape b = keypoint_bottleneck();
  const auto r32 = codec::data_size(b, codec::Width::k32);
  const auto jpeg = static_cast<std::size_t>(std::llround(static_cast<double>(r32.total_bytes) / 2.56));
  const double r16 = codec::data_size(b, codec::Width::k16, jpeg).ratio_vs_reference;
  const double r8 = codec::data_size(b, codec::Width::k8, jpeg).ratio_vs_reference;
  const bool ok = std::abs(r16 - 1.28) <= 0.01 && std::abs(r8 - 0.643) <= 0.01 && r32.header_bytes <= 64;
  return {ok, fmt("ratio16=%.4f ratio8=%.4f header=%.0f jpeg=%.0f", r16, r8, static_cast<double>(r32.header_bytes),
                  static_cast<double>(jpeg))};
}

// 2. Bottleneck tensor ratio of the student fixture.
Outcome tensor_ratio() {
  const Shape b = keypoint_bottleneck();
  const double r = netspec::tensor_ratio(b, kKeypointInput);
  bool band = true;
  double lo = 1.0;
  double hi = 0.0;
  for (std::size_t w = 800; w <= 1333; ++w) {
    for (const Shape& in : {Shape{3, 800, w}, Shape{3, w, 800}}) {
      const double x = netspec::tensor_ratio(*netspec::trace(netspec::student_l1(), in).bottleneck, in);
      lo = std::min(lo, x);
      hi = std::max(hi, x);
      band = band && x >= 0.06 && x <= 0.07;
    }
  }
  return {std::abs(r - 0.0657) <= 0.003 && band, fmt("ratio=%.5f band=[%.5f, %.5f]", r, lo, hi)};
}

// 3. 8-bit quantization round trip.
Outcome quant_round_trip() {
  std::mt19937_64 rng(2026);
  std::uniform_int_distribution<std::size_t> dim(1, 24);
  std::uniform_real_distribution<float> bound(-10.0f, 10.0f);
  double worst = 0.0;  // max of err - scale/2
  bool ok = true;
  for (int i = 0; i < 1000; ++i) {
    const Shape s{dim(rng), dim(rng), dim(rng)};
    float lo = bound(rng);
    float hi = bound(rng);
    if (lo > hi) std::swap(lo, hi);
    if (hi - lo < 1e-3f) hi = lo + 1e-3f;
    const Tensor t = random_fill(s, rng(), lo, hi);
    const auto q = codec::quantize8(t);
    const Tensor d = codec::dequantize(q);
    for (std::size_t k = 0; k < t.numel(); ++k) {
      const double excess = std::abs(static_cast<double>(d[k]) - t[k]) - q.scale / 2.0;
      worst = std::max(worst, excess);
      ok = ok && excess <= 1e-6;
    }
  }
  bool constants = true;
  for (float c : {0.0f, 1.0f, -1.0f, 3.25f, -7.5f, 1e-20f, 1e20f, -1e20f}) {
    const Tensor t(Shape{4, 5}, std::vector<float>(20, c));
    constants = constants && codec::dequantize(codec::quantize8(t)) == t;
  }
  return {ok && constants, fmt("max(err - scale/2)=%.3g constants_exact=%.0f", worst, constants ? 1.0 : 0.0)};
}

// 4. Loss reduction and gradients against central differences.
Outcome loss_gradient() {
  using distill::TapPoint;
  bool exact = true;
  double worst = 0.0;
  const float h = 0x1p-13f;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    // Dyadic values so s +/- h is exact in float.
    std::uniform_int_distribution<int> dv(-4096, 4096);
    auto dyadic = [&](const Shape& s) {
      std::vector<float> v(s.numel());
      for (float& x : v) x = static_cast<float>(std::ldexp(dv(rng), -10));
      return Tensor(s, v);
    };
    const Tensor a = dyadic(Shape{3, 4});
    const Tensor b = dyadic(Shape{3, 4});
    const std::vector<TapPoint> single{{0, 1.0, a, b}};
    exact = exact && distill::generalized_loss(single) == distill::sse_loss(a, b);

    std::uniform_real_distribution<double> lam(0.1, 3.0);
    std::vector<TapPoint> taps{{0, lam(rng), a, b}, {1, lam(rng), dyadic(Shape{6}), dyadic(Shape{6})}};
    const auto grad = distill::loss_grad(taps);
    for (std::size_t j = 0; j < taps.size(); ++j) {
      for (std::size_t i = 0; i < taps[j].student_out.numel(); ++i) {
        auto bump = [&](float delta) {
          auto copy = taps;
          std::vector<float> v(copy[j].student_out.data().begin(), copy[j].student_out.data().end());
          v[i] += delta;
          copy[j].student_out = Tensor(copy[j].student_out.shape(), v);
          return distill::generalized_loss(copy);
        };
        const double fd = (bump(h) - bump(-h)) / (2.0 * h);
        const double an = grad[j][i];
        worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(an), 1e-6));
      }
    }
  }
  return {exact && worst < 1e-4, fmt("single_tap_exact=%.0f max_rel_err=%.3g", exact ? 1.0 : 0.0, worst)};
}

// 5. Toy distillation against the Eckart-Young bound.
Outcome distillation() {
  const auto full = distill::toy_fixture("linear_full");
  const auto rf = distill::train_toy(full.teacher, full.student, full.dataset, full.cfg);
  const auto low = distill::toy_fixture("linear_lowrank");
  const auto rl = distill::train_toy(low.teacher, low.student, low.dataset, low.cfg);
  const double bound =
      distill::eckart_young_bound(*low.teacher_map, distill::samples_matrix(low.dataset), low.bottleneck_width);
  const bool ok = rf.history.size() <= 500 && rl.history.size() <= 500 && rf.final_loss < 1e-6 &&
                  rl.final_loss <= 1.05 * bound && rl.final_loss >= bound * (1 - 1e-9);
  return {ok, fmt("full_loss=%.3g lowrank_loss=%.6g bound=%.6g excess=%.4f", rf.final_loss, rl.final_loss, bound,
                  rl.final_loss / bound - 1.0)};
}

// 6. Gain over offloading at a vanishing link rate.
Outcome asymptotic_gain() {
  const auto cfg = cli::load_config(kConfigPath);
  latency::ChannelModel ch{0.01e6, 0.0};
  const double g = latency::gain_vs_offload(cfg.profile, ch, cfg.sizes, codec::Width::k8, latency::Strategy::SC);
  const double expect = static_cast<double>(cfg.sizes.jpeg_bytes) / static_cast<double>(cfg.sizes.bottleneck_bytes_8);
  return {std::abs(g / expect - 1.0) <= 0.02, fmt("gain=%.4f size_ratio=%.4f", g, expect)};
}

// 7. SC vs PO crossover.
Outcome crossover() {
  const auto cfg = cli::load_config(kConfigPath);
  const double bis = latency::crossover_rate(cfg.profile, cfg.sizes, codec::Width::k8, latency::Strategy::SC,
                                             latency::Strategy::PO, {0.1e6, 100e6});
  const double closed = latency::po_sc_crossover_closed_form(cfg.profile, cfg.sizes, codec::Width::k8);
  const bool ok = bis >= 7e6 && bis <= 9e6 && std::abs(bis / closed - 1.0) <= 1e-3;
  return {ok, fmt("bisection=%.4f Mbps closed_form=%.4f Mbps", bis / 1e6, closed / 1e6)};
}

// 8. Local computing passthrough.
Outcome local_anchor() {
  const auto cfg = cli::load_config(kConfigPath);
  const auto d = latency::total_delay(latency::Strategy::LC, cfg.profile, cfg.channel, cfg.sizes, codec::Width::k8);
  return {d.total == 2.25, fmt("total_lc=%.17g", d.total)};
}

// 9. Filter gate AUC and the SCNF identity.
Outcome filter_gate() {
  const auto cfg = cli::load_config(kConfigPath);
  const auto m = pipeline::gate_metrics(cfg.filter, 100000, cfg.seed);

  const Shape shape{3, 32, 32};
  latency::PayloadSizes sizes = cfg.sizes;
  sizes.bottleneck_bytes_8 = codec::data_size(shape, codec::Width::k8).total_bytes;
  pipeline::SessionConfig sc;
  sc.profile = cfg.profile;
  sc.channel = cfg.channel;
  sc.filter = cfg.filter;
  sc.seed = cfg.seed;
  const auto images = pipeline::synthetic_images(2000, shape, cfg.filter.p_empty, cfg.seed);
  const auto log = pipeline::run_session(images, sc);
  const double closed =
      latency::total_delay(latency::Strategy::SCNF, cfg.profile, cfg.channel, sizes, codec::Width::k8, log.drop_rate())
          .total;
  const double diff = std::abs(log.mean_total() - closed);
  return {std::abs(m.empirical_auc - 0.919) <= 0.01 && diff <= 1e-9,
          fmt("auc=%.5f drop_rate=%.5f |mean - closed_form|=%.3g", m.empirical_auc, log.drop_rate(), diff)};
}

pipeline::WireMessage random_message(std::mt19937_64& rng) {
  using pipeline::MsgType;
  std::uniform_int_distribution<int> type_d(0, 5);
  std::uniform_int_distribution<int> ndim_d(0, 4);
  std::uniform_int_distribution<std::uint32_t> dim_d(1, 8);
  pipeline::WireMessage m;
  m.type = static_cast<MsgType>(type_d(rng));
  if (m.type == MsgType::EmptyResult) return m;
  m.scale = std::bit_cast<float>(static_cast<std::uint32_t>(rng()));
  m.zero_point = static_cast<std::int32_t>(rng());
  const bool tensor = m.type == MsgType::QTensor8 || m.type == MsgType::QTensor16 || m.type == MsgType::FTensor32;
  const int ndim = tensor ? 1 + ndim_d(rng) : ndim_d(rng);
  std::size_t n = 1;
  for (int i = 0; i < ndim; ++i) {
    m.dims.push_back(dim_d(rng));
    n *= m.dims.back();
  }
  std::size_t len = rng() % 300;
  if (m.type == MsgType::QTensor8) len = n;
  if (m.type == MsgType::QTensor16) len = 2 * n;
  if (m.type == MsgType::FTensor32) len = 4 * n;
  if (m.type == MsgType::DetectionResult) len = 8;
  m.payload.resize(len);
  for (auto& b : m.payload) b = static_cast<std::uint8_t>(rng());
  return m;
}

// 10. Protocol identity, fuzz robustness and a loopback session.
Outcome protocol() {
  std::mt19937_64 rng(10);
  int identity_fail = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto m = random_message(rng);
    try {
      if (!(pipeline::decode_message(pipeline::encode_message(m)) == m)) ++identity_fail;
    } catch (const std::exception&) {
      ++identity_fail;
    }
  }

  int fuzz_other = 0;
  int fuzz_valid = 0;
  for (int i = 0; i < 100000; ++i) {
    std::vector<std::uint8_t> bytes;
    if (i % 2 == 0) {
      bytes = pipeline::encode_message(random_message(rng));
      const int flips = 1 + static_cast<int>(rng() % 4);
      for (int f = 0; f < flips; ++f) bytes[rng() % bytes.size()] = static_cast<std::uint8_t>(rng());
      if (rng() % 4 == 0) bytes.resize(rng() % (bytes.size() + 8));
    } else {
      bytes.resize(rng() % 80);
      for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
      if (bytes.size() >= 4 && rng() % 2 == 0) std::copy(pipeline::kMagic.begin(), pipeline::kMagic.end(), bytes.begin());
    }
    try {
      const auto m = pipeline::decode_message(bytes);
      if (pipeline::encode_message(m) == bytes) ++fuzz_valid;
      else ++fuzz_other;
    } catch (const ProtocolError&) {
    } catch (...) {
      ++fuzz_other;
    }
  }

  const auto cfg = cli::load_config(kConfigPath);
  pipeline::ServerOptions so;
  so.log = [](const std::string&) {};
  std::mutex mu;
  std::multiset<std::uint64_t> received;
  so.on_tensor = [&](const Tensor& t) {
    std::lock_guard<std::mutex> lock(mu);
    received.insert(pipeline::tensor_checksum(t));
  };
  pipeline::Server server(so);
  server.start();
  pipeline::SessionConfig sc;
  sc.profile = cfg.profile;
  sc.channel = cfg.channel;
  sc.channel.rate_bps = 1e10;  // loopback pacing is not under test here
  sc.use_filter = false;       // every image crosses the socket
  sc.mode = pipeline::SessionMode::Socket;
  sc.server = pipeline::Endpoint{"127.0.0.1", server.port()};
  sc.seed = cfg.seed;
  const auto images = pipeline::synthetic_images(100, cfg.session.tensor_shape, 0.0, cfg.seed);
  const auto log = pipeline::run_session(images, sc);
  server.stop();
  std::multiset<std::uint64_t> expected;
  for (std::size_t i = 0; i < images.size(); ++i) {
    expected.insert(pipeline::tensor_checksum(codec::dequantize(codec::quantize8(images[i].bottleneck))));
  }
  const bool loop_ok = log.records.size() == 100 && received == expected;
  std::ostringstream d;
  d << "identity_failures=" << identity_fail << " fuzz_valid=" << fuzz_valid << " fuzz_unexpected=" << fuzz_other
    << " loopback_images=" << log.records.size() << " loopback_bit_exact=" << (loop_ok ? 1 : 0);
  return {identity_fail == 0 && fuzz_other == 0 && loop_ok, d.str()};
}

}  // namespace

int main() {
  bool all = true;
  all &= run(1, 1.0, size_algebra);
  all &= run(2, 0.0, tensor_ratio);
  all &= run(3, 10.0, quant_round_trip);
  all &= run(4, 0.0, loss_gradient);
  all &= run(5, 60.0, distillation);
  all &= run(6, 0.0, asymptotic_gain);
  all &= run(7, 0.0, crossover);
  all &= run(8, 0.0, local_anchor);
  all &= run(9, 0.0, filter_gate);
  all &= run(10, 0.0, protocol);
  std::printf("acceptance %s\n", all ? "PASS" : "FAIL");
  return all ? 0 : 1;
}
