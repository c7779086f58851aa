// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#include "splitwire/codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "splitwire/errors.hpp"
#include "splitwire/half.hpp"

namespace splitwire::codec {

namespace {

constexpr std::size_t kFixedHeaderBytes = 23;

std::uint8_t clamp_u8(double v) { return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0)); }

}  // namespace

std::size_t bytes_per_element(Width w) {
  switch (w) {
    case Width::k8:
      return 1;
    case Width::k16:
      return 2;
    case Width::k32:
      return 4;
  }
  throw ArgumentError("unknown width");
}

Width width_from_bits(int bits) {
  switch (bits) {
    case 8:
      return Width::k8;
    case 16:
      return Width::k16;
    case 32:
      return Width::k32;
    default:
      throw ArgumentError("width must be 8, 16 or 32, got " + std::to_string(bits));
  }
}

QuantizedTensor quantize8(const Tensor& t, QuantMode mode) {
  if (t.numel() == 0) throw ShapeError("quantize8: empty tensor");
  const auto [lo_it, hi_it] = std::minmax_element(t.data().begin(), t.data().end());
  const double lo = *lo_it;
  const double hi = *hi_it;

  QuantizedTensor q;
  q.shape = t.shape();
  q.width = Width::k8;
  q.payload.resize(t.numel());

  if (lo == hi) {
    // Constant tensor: c = scale * (q - zp) exactly.
    std::uint8_t level = 0;
    if (lo == 0.0) {
      q.scale = 1.0f;
      q.zero_point = 0;
    } else if (lo > 0.0) {
      q.scale = static_cast<float>(lo);
      q.zero_point = 0;
      level = 1;
    } else {
      q.scale = static_cast<float>(-lo);
      q.zero_point = 1;
    }
    std::fill(q.payload.begin(), q.payload.end(), level);
    return q;
  }

  if (mode == QuantMode::Symmetric) {
    const double amax = std::max(std::fabs(lo), std::fabs(hi));
    q.scale = static_cast<float>(amax / 127.0);
    q.zero_point = kSymmetricZeroPoint;
  } else {
    const double rmin = std::min(lo, 0.0);
    const double rmax = std::max(hi, 0.0);
    q.scale = static_cast<float>((rmax - rmin) / 255.0);
    q.zero_point = static_cast<std::int32_t>(std::clamp(std::nearbyint(-rmin / q.scale), 0.0, 255.0));
  }

  // Quantize against the scale that actually goes on the wire.
  const double scale = q.scale;
  const double zp = q.zero_point;
  const auto values = t.data();
  for (std::size_t i = 0; i < values.size(); ++i) {
    q.payload[i] = clamp_u8(std::nearbyint(values[i] / scale) + zp);
  }
  return q;
}

QuantizedTensor quantize16(const Tensor& t) {
  QuantizedTensor q;
  q.shape = t.shape();
  q.width = Width::k16;
  q.scale = 1.0f;
  q.zero_point = 0;
  q.payload.resize(2 * t.numel());
  const auto values = t.data();
  for (std::size_t i = 0; i < values.size(); ++i) {
    float v = values[i];
    if (std::fabs(v) > kHalfMax) {
      v = std::copysign(kHalfMax, v);
      q.saturated = true;
    }
    const std::uint16_t h = float_to_half_bits(v);
    q.payload[2 * i] = static_cast<std::uint8_t>(h & 0xff);
    q.payload[2 * i + 1] = static_cast<std::uint8_t>(h >> 8);
  }
  return q;
}

QuantizedTensor passthrough32(const Tensor& t) {
  QuantizedTensor q;
  q.shape = t.shape();
  q.width = Width::k32;
  q.payload.resize(4 * t.numel());
  const auto values = t.data();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(values[i]);
    for (int b = 0; b < 4; ++b) q.payload[4 * i + b] = static_cast<std::uint8_t>(bits >> (8 * b));
  }
  return q;
}

QuantizedTensor quantize(const Tensor& t, Width w, QuantMode mode) {
  switch (w) {
    case Width::k8:
      return quantize8(t, mode);
    case Width::k16:
      return quantize16(t);
    case Width::k32:
      return passthrough32(t);
  }
  throw ArgumentError("unknown width");
}

Tensor dequantize(const QuantizedTensor& q) {
  if (q.shape.empty()) throw CodecError("dequantize: missing shape");
  const std::size_t n = q.shape.numel();
  const std::size_t expected = n * bytes_per_element(q.width);
  if (q.payload.size() != expected) {
    throw CodecError("dequantize: payload is " + std::to_string(q.payload.size()) + " bytes, expected " +
                     std::to_string(expected));
  }
  std::vector<float> out(n);
  switch (q.width) {
    case Width::k8: {
      if (!(q.scale > 0.0f) || !std::isfinite(q.scale)) throw CodecError("dequantize: scale must be finite and > 0");
      if (q.zero_point < 0 || q.zero_point > 255) throw CodecError("dequantize: zero_point outside [0, 255]");
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = q.scale * static_cast<float>(static_cast<std::int32_t>(q.payload[i]) - q.zero_point);
      }
      break;
    }
    case Width::k16:
      for (std::size_t i = 0; i < n; ++i) {
        const auto h = static_cast<std::uint16_t>(q.payload[2 * i] | (q.payload[2 * i + 1] << 8));
        out[i] = half_bits_to_float(h);
      }
      break;
    case Width::k32:
      for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(q.payload[4 * i + b]) << (8 * b);
        out[i] = std::bit_cast<float>(bits);
      }
      break;
  }
  for (float v : out) {
    if (!std::isfinite(v)) throw CodecError("dequantize: payload decodes to a non-finite value");
  }
  return Tensor(q.shape, std::move(out));
}

std::size_t wire_header_bytes(std::size_t rank) { return kFixedHeaderBytes + 4 * rank; }

SizeReport data_size(const Shape& shape, Width w, std::size_t reference_bytes) {
  SizeReport r;
  r.payload_bytes = shape.numel() * bytes_per_element(w);
  r.header_bytes = wire_header_bytes(shape.rank());
  r.total_bytes = r.payload_bytes + r.header_bytes;
  if (reference_bytes > 0) r.ratio_vs_reference = static_cast<double>(r.total_bytes) / reference_bytes;
  return r;
}

SizeReport data_size(const QuantizedTensor& q, std::size_t reference_bytes) {
  SizeReport r = data_size(q.shape, q.width, reference_bytes);
  r.payload_bytes = q.payload.size();
  r.total_bytes = r.payload_bytes + r.header_bytes;
  if (reference_bytes > 0) r.ratio_vs_reference = static_cast<double>(r.total_bytes) / reference_bytes;
  return r;
}

double ratio_vs(const QuantizedTensor& q, std::size_t reference_bytes) {
  if (reference_bytes == 0) throw RangeError("ratio_vs: reference_bytes must be > 0");
  return data_size(q, reference_bytes).ratio_vs_reference;
}

}  // namespace splitwire::codec
