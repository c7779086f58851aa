// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "splitwire/tensor.hpp"

namespace splitwire::codec {

enum class Width : std::uint8_t { k8 = 8, k16 = 16, k32 = 32 };

/// Bytes per element on the wire.
std::size_t bytes_per_element(Width w);
/// Parses 8/16/32, throws ArgumentError otherwise.
Width width_from_bits(int bits);

/// 8-bit scheme. Affine carries a zero point; Symmetric pins it at 128 so the
/// only free parameter is the 32-bit scale.
enum class QuantMode { Affine, Symmetric };

struct QuantizedTensor {
  Shape shape;
  Width width = Width::k32;
  float scale = 1.0f;
  std::int32_t zero_point = 0;
  std::vector<std::uint8_t> payload;
  /// Set when quantize16 had to clamp values to +-65504.
  bool saturated = false;

  std::size_t numel() const { return shape.numel(); }
  friend bool operator==(const QuantizedTensor&, const QuantizedTensor&) = default;
};

inline constexpr std::int32_t kSymmetricZeroPoint = 128;

/// Per-tensor uint8 affine quantization:
///   x ~= scale * (q - zero_point), q in [0, 255].
/// The representable range always contains 0. Constant tensors use a
/// dedicated encoding that round-trips exactly.
QuantizedTensor quantize8(const Tensor& t, QuantMode mode = QuantMode::Affine);

/// binary16 cast, little-endian per element.
QuantizedTensor quantize16(const Tensor& t);

/// float32 passthrough, little-endian per element.
QuantizedTensor passthrough32(const Tensor& t);

QuantizedTensor quantize(const Tensor& t, Width w, QuantMode mode = QuantMode::Affine);

Tensor dequantize(const QuantizedTensor& q);

struct SizeReport {
  std::size_t payload_bytes = 0;
  std::size_t header_bytes = 0;
  std::size_t total_bytes = 0;
  double ratio_vs_reference = 0.0;
};

/// Frame header size for a tensor of the given rank; see pipeline::header_size.
std::size_t wire_header_bytes(std::size_t rank);

/// Payload + framing header. ratio_vs_reference is filled when reference_bytes > 0.
SizeReport data_size(const QuantizedTensor& q, std::size_t reference_bytes = 0);

/// Size report for a shape/width pair without materializing a payload.
SizeReport data_size(const Shape& shape, Width w, std::size_t reference_bytes = 0);

/// total_bytes / reference_bytes.
double ratio_vs(const QuantizedTensor& q, std::size_t reference_bytes);

}  // namespace splitwire::codec
