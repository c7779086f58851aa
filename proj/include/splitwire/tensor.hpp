// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace splitwire {

/// Ordered list of positive extents. Rank is at least one.
class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<std::size_t> dims);
  explicit Shape(std::vector<std::size_t> dims);

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t rank() const { return dims_.size(); }
  std::size_t operator[](std::size_t i) const { return dims_.at(i); }
  std::size_t numel() const;
  bool empty() const { return dims_.empty(); }

  /// "3x223x265" style rendering.
  std::string str() const;
  /// Parses "CxHxW" (any rank, 'x' separated).
  static Shape parse(const std::string& text);

  friend bool operator==(const Shape&, const Shape&) = default;

 private:
  std::vector<std::size_t> dims_;
};

/// Dense row-major float32 tensor. Immutable once constructed; all values finite.
class Tensor {
 public:
  Tensor(Shape shape, std::vector<float> values);

  const Shape& shape() const { return shape_; }
  std::size_t numel() const { return data_.size(); }
  std::span<const float> data() const { return data_; }
  float operator[](std::size_t i) const { return data_[i]; }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<float> data_;
};

Tensor make_tensor(const Shape& shape, std::span<const float> values);

/// Elementwise a - b.
Tensor sub(const Tensor& a, const Tensor& b);

/// Sum of squares, accumulated in double.
double sq_sum(const Tensor& a);

/// Deterministic uniform fill in [lo, hi).
Tensor random_fill(const Shape& shape, std::uint64_t seed, float lo, float hi);

}  // namespace splitwire
