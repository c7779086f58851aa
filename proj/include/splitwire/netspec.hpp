// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "splitwire/tensor.hpp"

namespace splitwire::netspec {

enum class LayerKind { Conv, BatchNorm, ReLU, MaxPool, AdaptiveAvgPool, Linear, Softmax };

std::string to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& name);

/// One layer of a declarative network. Only the fields relevant to `kind` are read.
struct LayerSpec {
  LayerKind kind = LayerKind::ReLU;
  std::size_t oc = 0;  // conv output channels
  std::size_t k = 1;   // kernel size (conv, maxpool)
  std::size_t s = 1;   // stride
  std::size_t p = 0;   // padding
  std::size_t oh = 0;  // adaptive pool output height
  std::size_t ow = 0;  // adaptive pool output width
  std::size_t in_features = 0;
  std::size_t out_features = 0;
  bool bias = false;   // conv only; linear layers always carry a bias
  bool bottleneck = false;

  static LayerSpec conv(std::size_t oc, std::size_t k, std::size_t s = 1, std::size_t p = 0);
  static LayerSpec batchnorm();
  static LayerSpec relu();
  static LayerSpec maxpool(std::size_t k, std::size_t s, std::size_t p = 0);
  static LayerSpec adaptive_avgpool(std::size_t oh, std::size_t ow);
  static LayerSpec linear(std::size_t in_features, std::size_t out_features);
  static LayerSpec softmax();

  LayerSpec& as_bottleneck() {
    bottleneck = true;
    return *this;
  }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct NetworkSpec {
  std::string name;
  std::vector<LayerSpec> layers;

  /// Throws ShapeError when layer hyperparameters are out of range or more
  /// than one layer is flagged as the bottleneck.
  void validate() const;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

struct ShapeTrace {
  Shape input;
  std::vector<Shape> outputs;  // one per layer
  std::optional<Shape> bottleneck;
  std::optional<std::size_t> bottleneck_index;
  std::uint64_t params = 0;

  const Shape& output() const { return outputs.empty() ? input : outputs.back(); }
};

/// Output shape of a single layer. Conv/pool layers take [C, H, W].
Shape output_shape(const LayerSpec& layer, const Shape& in_shape);

/// Parameters of a single layer given its input shape.
std::uint64_t layer_params(const LayerSpec& layer, const Shape& in_shape);

/// Sequential shape propagation. ShapeError messages carry the failing layer index.
ShapeTrace trace(const NetworkSpec& net, const Shape& in_shape);

std::uint64_t param_count(const NetworkSpec& net, const Shape& in_shape);

/// numel(bottleneck) / numel(input).
double tensor_ratio(const Shape& bottleneck, const Shape& input);

// Built-in fixtures ----------------------------------------------------------

/// ResNet L0: conv 7x7/2 + BN + ReLU + maxpool 3x3/2.
NetworkSpec resnet_stem();
/// Teacher L1 (ResNet-50 layer1, three bottleneck blocks, shortcuts omitted).
NetworkSpec teacher_l1_block();
/// Student L1 with the 3-channel bottleneck conv.
NetworkSpec student_l1_block();
/// Stem followed by the teacher L1 block; traces from the image shape.
NetworkSpec teacher_l1();
/// Stem followed by the student L1 block; traces from the image shape.
NetworkSpec student_l1();
/// Prefilter classifier fed by the L0 output.
NetworkSpec neural_filter();

std::vector<std::string> fixture_names();
/// Throws ArgumentError on unknown name.
NetworkSpec fixture(const std::string& name);

// JSON (field names: kind, oc, k, s, p, oh, ow, in_features, out_features, bottleneck)
void to_json(nlohmann::json& j, const LayerSpec& layer);
void from_json(const nlohmann::json& j, LayerSpec& layer);
void to_json(nlohmann::json& j, const NetworkSpec& net);
void from_json(const nlohmann::json& j, NetworkSpec& net);

}  // namespace splitwire::netspec
