// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#include "splitwire/wire.hpp"

#include <bit>
#include <cstring>
#include <limits>
#include <string>

#include "splitwire/errors.hpp"

namespace splitwire::pipeline {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) | (std::uint32_t{b[off + 2]} << 8) |
         std::uint32_t{b[off + 3]};
}

std::uint64_t get_u64(std::span<const std::uint8_t> b, std::size_t off) {
  return (std::uint64_t{get_u32(b, off)} << 32) | get_u32(b, off + 4);
}

bool is_tensor_type(MsgType t) {
  return t == MsgType::QTensor8 || t == MsgType::QTensor16 || t == MsgType::FTensor32;
}

std::uint64_t element_bytes(MsgType t) {
  switch (t) {
    case MsgType::QTensor8:
      return 1;
    case MsgType::QTensor16:
      return 2;
    case MsgType::FTensor32:
      return 4;
    default:
      return 0;
  }
}

// Checks payload_len against dims for tensor frames. Returns false on overflow
// or mismatch.
bool tensor_payload_consistent(MsgType type, const std::vector<std::uint32_t>& dims, std::uint64_t payload_len) {
  if (dims.empty()) return false;
  std::uint64_t n = element_bytes(type);
  for (std::uint32_t d : dims) {
    if (d == 0) return false;
    if (n > std::numeric_limits<std::uint64_t>::max() / d) return false;
    n *= d;
  }
  return n == payload_len;
}

}  // namespace

bool operator==(const WireMessage& a, const WireMessage& b) {
  return a.type == b.type && a.dims == b.dims &&
         std::bit_cast<std::uint32_t>(a.scale) == std::bit_cast<std::uint32_t>(b.scale) &&
         a.zero_point == b.zero_point && a.payload == b.payload;
}

std::size_t header_size(std::size_t ndim) { return kFixedHeaderBytes + 4 * ndim; }

std::vector<std::uint8_t> encode_message(const WireMessage& m) {
  if (m.dims.size() > kMaxDims) throw ProtocolError("encode: ndim " + std::to_string(m.dims.size()) + " exceeds 8");
  if (static_cast<std::uint8_t>(m.type) > static_cast<std::uint8_t>(MsgType::EmptyResult)) {
    throw ProtocolError("encode: unknown message type");
  }
  if (is_tensor_type(m.type) && !tensor_payload_consistent(m.type, m.dims, m.payload.size())) {
    throw ProtocolError("encode: payload length inconsistent with dims");
  }
  std::vector<std::uint8_t> out;
  out.reserve(m.encoded_size());
  for (std::uint8_t b : kMagic) out.push_back(b);
  out.push_back(kVersion);
  out.push_back(static_cast<std::uint8_t>(m.type));
  out.push_back(static_cast<std::uint8_t>(m.dims.size()));
  for (std::uint32_t d : m.dims) put_u32(out, d);
  put_u32(out, std::bit_cast<std::uint32_t>(m.scale));
  put_u32(out, static_cast<std::uint32_t>(m.zero_point));
  put_u64(out, m.payload.size());
  out.insert(out.end(), m.payload.begin(), m.payload.end());
  return out;
}

std::size_t parse_prefix(std::span<const std::uint8_t> prefix) {
  if (prefix.size() < kPrefixBytes) throw ProtocolError("truncated frame prefix");
  if (!std::equal(kMagic.begin(), kMagic.end(), prefix.begin())) throw ProtocolError("bad magic");
  if (prefix[4] != kVersion) throw ProtocolError("unsupported version " + std::to_string(prefix[4]));
  if (prefix[5] > static_cast<std::uint8_t>(MsgType::EmptyResult)) {
    throw ProtocolError("unknown message type " + std::to_string(prefix[5]));
  }
  const std::size_t ndim = prefix[6];
  if (ndim > kMaxDims) throw ProtocolError("ndim " + std::to_string(ndim) + " exceeds 8");
  return ndim;
}

FrameHeader parse_header(std::span<const std::uint8_t> header) {
  const std::size_t ndim = parse_prefix(header);
  if (header.size() < header_size(ndim)) throw ProtocolError("truncated frame header");
  FrameHeader h;
  h.type = static_cast<MsgType>(header[5]);
  h.dims.resize(ndim);
  std::size_t off = kPrefixBytes;
  for (std::size_t i = 0; i < ndim; ++i, off += 4) h.dims[i] = get_u32(header, off);
  h.scale = std::bit_cast<float>(get_u32(header, off));
  off += 4;
  h.zero_point = static_cast<std::int32_t>(get_u32(header, off));
  off += 4;
  h.payload_len = get_u64(header, off);

  if (is_tensor_type(h.type) && !tensor_payload_consistent(h.type, h.dims, h.payload_len)) {
    throw ProtocolError("payload_len " + std::to_string(h.payload_len) + " inconsistent with tensor dims");
  }
  if (h.type == MsgType::EmptyResult && (h.payload_len != 0 || ndim != 0)) {
    throw ProtocolError("EMPTY_RESULT must have no dims and no payload");
  }
  return h;
}

WireMessage decode_message(std::span<const std::uint8_t> bytes) {
  const std::size_t ndim = parse_prefix(bytes);
  const std::size_t hdr = header_size(ndim);
  FrameHeader h = parse_header(bytes);
  const std::size_t available = bytes.size() - hdr;
  if (h.payload_len > available) throw ProtocolError("truncated payload");
  if (h.payload_len < available) throw ProtocolError("trailing bytes after payload");
  WireMessage m;
  m.type = h.type;
  m.dims = std::move(h.dims);
  m.scale = h.scale;
  m.zero_point = h.zero_point;
  m.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(hdr), bytes.end());
  return m;
}

WireMessage to_message(const codec::QuantizedTensor& q) {
  WireMessage m;
  switch (q.width) {
    case codec::Width::k8:
      m.type = MsgType::QTensor8;
      break;
    case codec::Width::k16:
      m.type = MsgType::QTensor16;
      break;
    case codec::Width::k32:
      m.type = MsgType::FTensor32;
      break;
  }
  if (q.shape.rank() > kMaxDims) throw ProtocolError("tensor rank exceeds 8");
  for (std::size_t d : q.shape.dims()) {
    if (d > std::numeric_limits<std::uint32_t>::max()) throw ProtocolError("tensor extent exceeds uint32");
    m.dims.push_back(static_cast<std::uint32_t>(d));
  }
  m.scale = q.scale;
  m.zero_point = q.zero_point;
  m.payload = q.payload;
  return m;
}

codec::QuantizedTensor to_quantized(const WireMessage& m) {
  codec::QuantizedTensor q;
  switch (m.type) {
    case MsgType::QTensor8:
      q.width = codec::Width::k8;
      break;
    case MsgType::QTensor16:
      q.width = codec::Width::k16;
      break;
    case MsgType::FTensor32:
      q.width = codec::Width::k32;
      break;
    default:
      throw ProtocolError("message type " + std::to_string(static_cast<int>(m.type)) + " does not carry a tensor");
  }
  if (m.dims.empty()) throw ProtocolError("tensor message without dims");
  q.shape = Shape(std::vector<std::size_t>(m.dims.begin(), m.dims.end()));
  q.scale = m.scale;
  q.zero_point = m.zero_point;
  q.payload = m.payload;
  return q;
}

WireMessage detection_result(std::uint64_t checksum) {
  WireMessage m;
  m.type = MsgType::DetectionResult;
  put_u64(m.payload, checksum);
  return m;
}

std::uint64_t detection_checksum(const WireMessage& m) {
  if (m.type != MsgType::DetectionResult || m.payload.size() != 8) {
    throw ProtocolError("expected DETECTION_RESULT with an 8-byte checksum");
  }
  return get_u64(m.payload, 0);
}

WireMessage empty_result() { return WireMessage{}; }

std::uint64_t tensor_checksum(const Tensor& t) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (float v : t.data()) {
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
    for (int b = 0; b < 4; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

}  // namespace splitwire::pipeline
