// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace splitwire {

/// IEEE 754 binary32 -> binary16 bits, round-to-nearest-even. Overflow goes to
/// infinity; NaN keeps its sign and becomes a quiet NaN.
std::uint16_t float_to_half_bits(float value);

/// Exact binary16 -> binary32 widening.
float half_bits_to_float(std::uint16_t bits);

inline constexpr float kHalfMax = 65504.0f;

}  // namespace splitwire
