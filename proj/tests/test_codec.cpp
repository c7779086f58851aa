// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "splitwire/codec.hpp"
#include "splitwire/errors.hpp"
#include "splitwire/half.hpp"
#include "splitwire/netspec.hpp"

using namespace splitwire;
using codec::Width;

TEST_SUITE("half") {
  TEST_CASE("widening matches the field-layout decoder for every encoding") {
    for (std::uint32_t b = 0; b <= 0xffff; ++b) {
      const auto bits = static_cast<std::uint16_t>(b);
      const double ref = oracle::half_value(bits);
      const float got = half_bits_to_float(bits);
      if (std::isnan(ref)) {
        CHECK(std::isnan(got));
      } else {
        REQUIRE(static_cast<double>(got) == ref);
      }
    }
  }

  TEST_CASE("narrowing matches the brute-force nearest-half oracle") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> log_mag(-26.0, 16.5);
    std::vector<float> probes{0.0f, -0.0f, 1.0f, 1.0f + 0x1p-12f, 1.0f + 0x1p-11f, 1.0f + 3 * 0x1p-12f,
                              65504.0f, 65519.0f, 65520.0f, 0x1p-24f, 0x1p-25f, 0x1.8p-25f, 6.1e-5f};
    for (int i = 0; i < 400; ++i) {
      const float x = static_cast<float>(std::exp2(log_mag(rng))) * (i % 2 ? -1.0f : 1.0f);
      probes.push_back(x);
    }
    // Every midpoint between adjacent halves exercises the tie rule.
    for (std::uint16_t b = 0x3c00; b < 0x3c40; ++b) {
      probes.push_back(static_cast<float>((oracle::half_value(b) + oracle::half_value(b + 1)) / 2));
    }
    for (float x : probes) {
      CAPTURE(x);
      CHECK(float_to_half_bits(x) == oracle::nearest_half_bits(x));
    }
  }

  TEST_CASE("NaN stays NaN") {
    CHECK(std::isnan(half_bits_to_float(float_to_half_bits(std::numeric_limits<float>::quiet_NaN()))));
  }
}

TEST_SUITE("codec") {
  TEST_CASE("constant tensors round-trip exactly") {
    for (float c : {5.0f, 0.0f, -3.25f, 1e-20f, 7e5f}) {
      const Tensor t(Shape{2, 2}, std::vector<float>(4, c));
      const auto q = codec::quantize8(t);
      CHECK(q.scale > 0.0f);
      CHECK(q.zero_point >= 0);
      CHECK(q.zero_point <= 255);
      CHECK(codec::dequantize(q) == t);
    }
  }

  TEST_CASE("the integer grid 0..255 round-trips with scale 1 and zero point 0") {
    std::vector<float> v(256);
    for (int i = 0; i < 256; ++i) v[static_cast<std::size_t>(i)] = static_cast<float>(i);
    const Tensor t(Shape{256}, v);
    const auto q = codec::quantize8(t);
    CHECK(q.scale == 1.0f);
    CHECK(q.zero_point == 0);
    CHECK(codec::dequantize(q) == t);
  }

  TEST_CASE("every element dequantizes to its nearest level, within scale/2") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const float lo = seed % 3 == 0 ? 2.0f : -1.0f;  // includes same-sign tensors
      const Tensor t = random_fill(Shape{3, 9, 11}, seed, lo, lo + 2.0f + static_cast<float>(seed % 7));
      const auto q = codec::quantize8(t);
      const Tensor d = codec::dequantize(q);
      const double scale = q.scale;
      for (std::size_t i = 0; i < t.numel(); ++i) {
        const double err = std::abs(static_cast<double>(d[i]) - static_cast<double>(t[i]));
        REQUIRE(err <= scale / 2 + 1e-6);
        REQUIRE(err <= oracle::nearest_level_distance(t[i], scale, q.zero_point) + 1e-6);
      }
    }
  }

  TEST_CASE("quantize8 is monotone and deterministic") {
    const Tensor t = random_fill(Shape{4096}, 3, -4.0f, 9.0f);
    const auto q = codec::quantize8(t);
    for (std::size_t i = 0; i < t.numel(); ++i) {
      for (std::size_t j = i + 1; j < std::min<std::size_t>(t.numel(), i + 64); ++j) {
        if (t[i] <= t[j]) {
          CHECK(q.payload[i] <= q.payload[j]);
        } else {
          CHECK(q.payload[i] >= q.payload[j]);
        }
      }
    }
    CHECK(codec::quantize8(t).payload == q.payload);
  }

  TEST_CASE("symmetric mode fixes the zero point") {
    const Tensor t = random_fill(Shape{500}, 4, -3.0f, 1.0f);
    const auto q = codec::quantize8(t, codec::QuantMode::Symmetric);
    CHECK(q.zero_point == codec::kSymmetricZeroPoint);
    const Tensor d = codec::dequantize(q);
    for (std::size_t i = 0; i < t.numel(); ++i) CHECK(std::abs(d[i] - t[i]) <= q.scale / 2 + 1e-6);
  }

  TEST_CASE("binary16 cast round-trips representable values and saturates") {
    const Tensor exact(Shape{3}, {1.0f, 0.5f, -2.0f});
    const auto q = codec::quantize16(exact);
    CHECK(q.payload.size() == 6);
    CHECK(q.scale == 1.0f);
    CHECK(q.zero_point == 0);
    CHECK_FALSE(q.saturated);
    CHECK(codec::dequantize(q) == exact);

    const float x = 1.0f + 0x1p-12f;
    const auto q2 = codec::quantize16(Tensor(Shape{1}, {x}));
    CHECK(std::abs(codec::dequantize(q2)[0] - x) <= 0x1p-11f * x);

    const auto q3 = codec::quantize16(Tensor(Shape{2}, {1e6f, -1e6f}));
    CHECK(q3.saturated);
    CHECK(codec::dequantize(q3) == Tensor(Shape{2}, {65504.0f, -65504.0f}));
  }

  TEST_CASE("binary16 payload is little-endian") {
    const auto q = codec::quantize16(Tensor(Shape{1}, {1.0f}));
    CHECK(q.payload[0] == 0x00);
    CHECK(q.payload[1] == 0x3c);
  }

  TEST_CASE("32-bit passthrough is bit-identical") {
    const Tensor t = random_fill(Shape{7, 7}, 5, -1e3f, 1e3f);
    const auto q = codec::passthrough32(t);
    CHECK(q.payload.size() == 4 * t.numel());
    const Tensor d = codec::dequantize(q);
    CHECK(std::memcmp(d.data().data(), t.data().data(), 4 * t.numel()) == 0);
  }

  TEST_CASE("corrupt payloads are rejected") {
    const Tensor t = random_fill(Shape{10}, 6, 0.0f, 1.0f);
    for (Width w : {Width::k8, Width::k16, Width::k32}) {
      auto q = codec::quantize(t, w);
      q.payload.pop_back();
      CHECK_THROWS_AS(codec::dequantize(q), CodecError);
    }
    auto q = codec::quantize8(t);
    q.scale = 0.0f;
    CHECK_THROWS_AS(codec::dequantize(q), CodecError);
    q = codec::quantize8(t);
    q.zero_point = 300;
    CHECK_THROWS_AS(codec::dequantize(q), CodecError);
  }

  TEST_CASE("width parsing") {
    CHECK(codec::width_from_bits(16) == Width::k16);
    CHECK_THROWS_AS(codec::width_from_bits(12), ArgumentError);
  }

  TEST_CASE("size accounting") {
    const Shape s{3, 223, 265};
    const auto r8 = codec::data_size(s, Width::k8);
    const auto r32 = codec::data_size(s, Width::k32);
    CHECK(r8.total_bytes == r8.payload_bytes + r8.header_bytes);
    CHECK(r8.header_bytes == 35);
    CHECK(r8.header_bytes < 64);
    CHECK(static_cast<double>(r8.payload_bytes) / static_cast<double>(r32.payload_bytes) == 0.25);

    // Reference of 275,800 bytes gives the published 8-bit ratio.
    CHECK(std::abs(codec::data_size(s, Width::k8, 275800).ratio_vs_reference - 0.643) <= 0.001);
    const auto q = codec::quantize8(random_fill(Shape{4}, 1, 0.0f, 1.0f));
    CHECK_THROWS_AS(codec::ratio_vs(q, 0), RangeError);
  }

  TEST_CASE("totals are ordered by width for numel above 64") {
    for (std::size_t n : {65u, 100u, 1000u, 177285u}) {
      const Shape s{n};
      CHECK(codec::data_size(s, Width::k8).total_bytes < codec::data_size(s, Width::k16).total_bytes);
      CHECK(codec::data_size(s, Width::k16).total_bytes < codec::data_size(s, Width::k32).total_bytes);
    }
  }

  TEST_CASE("traced bottleneck ratios against a JPEG reference solved from 2.56") {
    const Shape in{3, 874, 1044};
    const Shape b = *netspec::trace(netspec::student_l1(), in).bottleneck;
    const auto total32 = codec::data_size(b, Width::k32).total_bytes;
    const auto jpeg = static_cast<std::size_t>(std::llround(static_cast<double>(total32) / 2.56));
    CHECK(std::abs(codec::data_size(b, Width::k16, jpeg).ratio_vs_reference - 1.28) <= 0.01);
    CHECK(std::abs(codec::data_size(b, Width::k8, jpeg).ratio_vs_reference - 0.643) <= 0.01);
  }
}
