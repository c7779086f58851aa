// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#include "splitwire/tensor.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "splitwire/errors.hpp"

namespace splitwire {

Shape::Shape(std::initializer_list<std::size_t> dims) : Shape(std::vector<std::size_t>(dims)) {}

Shape::Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw ShapeError("shape must have rank >= 1");
  for (std::size_t d : dims_) {
    if (d == 0) throw ShapeError("shape extents must be >= 1, got " + str());
  }
}

std::size_t Shape::numel() const {
  std::size_t n = 1;
  for (std::size_t d : dims_) {
    if (d != 0 && n > std::numeric_limits<std::size_t>::max() / d) {
      throw ShapeError("shape element count overflows: " + str());
    }
    n *= d;
  }
  return n;
}

std::string Shape::str() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (i) os << 'x';
    os << dims_[i];
  }
  return os.str();
}

Shape Shape::parse(const std::string& text) {
  std::vector<std::size_t> dims;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find_first_of("x,", start);
    if (end == std::string::npos) end = text.size();
    std::string tok = text.substr(start, end - start);
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) {
      throw ShapeError("cannot parse shape '" + text + "'");
    }
    dims.push_back(std::stoull(tok));
    start = end + 1;
  }
  return Shape(std::move(dims));
}

Tensor::Tensor(Shape shape, std::vector<float> values) : shape_(std::move(shape)), data_(std::move(values)) {
  if (shape_.empty()) throw ShapeError("tensor shape must have rank >= 1");
  if (data_.size() != shape_.numel()) {
    throw ShapeError("value count " + std::to_string(data_.size()) + " does not match shape " + shape_.str());
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) throw ValueError("non-finite value at index " + std::to_string(i));
  }
}

Tensor make_tensor(const Shape& shape, std::span<const float> values) {
  return Tensor(shape, std::vector<float>(values.begin(), values.end()));
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("sub: shape " + a.shape().str() + " vs " + b.shape().str());
  }
  std::vector<float> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return Tensor(a.shape(), std::move(out));
}

double sq_sum(const Tensor& a) {
  double acc = 0.0;
  for (float v : a.data()) acc += static_cast<double>(v) * static_cast<double>(v);
  return acc;
}

Tensor random_fill(const Shape& shape, std::uint64_t seed, float lo, float hi) {
  if (!(lo < hi)) throw RangeError("random_fill: lo must be < hi");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  const float top = std::nextafter(hi, lo);
  std::vector<float> out(shape.numel());
  for (float& v : out) {
    v = static_cast<float>(dist(rng));
    if (v >= hi) v = top;
  }
  return Tensor(shape, std::move(out));
}

}  // namespace splitwire
