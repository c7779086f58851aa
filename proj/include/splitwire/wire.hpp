// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

// Frame layout (all integers big-endian):
//
//   offset  size       field
//   0       4          magic "SCWP"
//   4       1          version (1)
//   5       1          msg_type
//   6       1          ndim (<= 8)
//   7       4 * ndim   dims, uint32 each
//   ...     4          scale, IEEE 754 binary32
//   ...     4          zero_point, int32
//   ...     8          payload_len, uint64
//   ...     payload_len payload
//
// Header size is 23 + 4 * ndim bytes, at most 55.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "splitwire/codec.hpp"

namespace splitwire::pipeline {

enum class MsgType : std::uint8_t {
  JpegImage = 0,
  QTensor8 = 1,
  QTensor16 = 2,
  FTensor32 = 3,
  DetectionResult = 4,
  EmptyResult = 5,
};

inline constexpr std::array<std::uint8_t, 4> kMagic{'S', 'C', 'W', 'P'};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kMaxDims = 8;
inline constexpr std::size_t kFixedHeaderBytes = 23;
inline constexpr std::size_t kPrefixBytes = 7;  // magic + version + type + ndim

struct WireMessage {
  MsgType type = MsgType::EmptyResult;
  std::vector<std::uint32_t> dims;
  float scale = 1.0f;
  std::int32_t zero_point = 0;
  std::vector<std::uint8_t> payload;

  /// Header bytes for this message's rank.
  std::size_t header_size() const { return kFixedHeaderBytes + 4 * dims.size(); }
  std::size_t encoded_size() const { return header_size() + payload.size(); }

  /// Bitwise comparison (scale compared by bit pattern).
  friend bool operator==(const WireMessage& a, const WireMessage& b);
};

std::size_t header_size(std::size_t ndim);

std::vector<std::uint8_t> encode_message(const WireMessage& m);

/// Decodes exactly one frame spanning all of `bytes`. Any deviation
/// (magic, version, type, ndim, truncation, trailing bytes, payload length
/// inconsistent with the type) raises ProtocolError.
WireMessage decode_message(std::span<const std::uint8_t> bytes);

/// Header fields parsed ahead of the payload (stream framing).
struct FrameHeader {
  MsgType type = MsgType::EmptyResult;
  std::vector<std::uint32_t> dims;
  float scale = 1.0f;
  std::int32_t zero_point = 0;
  std::uint64_t payload_len = 0;
};

/// Validates the 7-byte prefix and returns ndim.
std::size_t parse_prefix(std::span<const std::uint8_t> prefix);
/// Parses a complete header (prefix + dims + scale + zp + len) and checks
/// that payload_len is consistent with the message type.
FrameHeader parse_header(std::span<const std::uint8_t> header);

// Conversions between codec tensors and frames.
WireMessage to_message(const codec::QuantizedTensor& q);
/// Accepts QTENSOR8 / QTENSOR16 / FTENSOR32; ProtocolError otherwise.
codec::QuantizedTensor to_quantized(const WireMessage& m);

/// DETECTION_RESULT carrying an 8-byte big-endian checksum.
WireMessage detection_result(std::uint64_t checksum);
std::uint64_t detection_checksum(const WireMessage& m);
WireMessage empty_result();

/// FNV-1a over the float bit patterns of a tensor.
std::uint64_t tensor_checksum(const Tensor& t);

}  // namespace splitwire::pipeline
