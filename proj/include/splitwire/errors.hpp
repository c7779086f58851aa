// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace splitwire {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched or invalid tensor/layer extents.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or otherwise unusable numeric value.
class ValueError : public Error {
 public:
  using Error::Error;
};

/// Argument outside of its admissible interval.
class RangeError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Quantized payload does not match its declared layout.
class CodecError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unexpected wire frame.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Socket-level failure (connect, bind, send, receive).
class TransportError : public Error {
 public:
  using Error::Error;
};

class NoCrossoverError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace splitwire
