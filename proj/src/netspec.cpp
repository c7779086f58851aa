// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#include "splitwire/netspec.hpp"

#include "splitwire/errors.hpp"

namespace splitwire::netspec {

namespace {

struct KindName {
  LayerKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {LayerKind::Conv, "conv"},
    {LayerKind::BatchNorm, "batchnorm"},
    {LayerKind::ReLU, "relu"},
    {LayerKind::MaxPool, "maxpool"},
    {LayerKind::AdaptiveAvgPool, "adaptive_avgpool"},
    {LayerKind::Linear, "linear"},
    {LayerKind::Softmax, "softmax"},
};

void require_chw(const LayerSpec& layer, const Shape& in) {
  if (in.rank() != 3) {
    throw ShapeError(to_string(layer.kind) + " expects a [C,H,W] input, got " + in.str());
  }
}

std::size_t window_extent(std::size_t in, std::size_t k, std::size_t s, std::size_t p) {
  const std::size_t padded = in + 2 * p;
  if (padded < k) {
    throw ShapeError("kernel " + std::to_string(k) + " larger than padded extent " + std::to_string(padded));
  }
  return (padded - k) / s + 1;
}

}  // namespace

std::string to_string(LayerKind kind) {
  for (const auto& kn : kKindNames) {
    if (kn.kind == kind) return kn.name;
  }
  return "unknown";
}

LayerKind layer_kind_from_string(const std::string& name) {
  for (const auto& kn : kKindNames) {
    if (name == kn.name) return kn.kind;
  }
  throw ArgumentError("unknown layer kind '" + name + "'");
}

LayerSpec LayerSpec::conv(std::size_t oc, std::size_t k, std::size_t s, std::size_t p) {
  LayerSpec l;
  l.kind = LayerKind::Conv;
  l.oc = oc;
  l.k = k;
  l.s = s;
  l.p = p;
  return l;
}

LayerSpec LayerSpec::batchnorm() {
  LayerSpec l;
  l.kind = LayerKind::BatchNorm;
  return l;
}

LayerSpec LayerSpec::relu() {
  LayerSpec l;
  l.kind = LayerKind::ReLU;
  return l;
}

LayerSpec LayerSpec::maxpool(std::size_t k, std::size_t s, std::size_t p) {
  LayerSpec l;
  l.kind = LayerKind::MaxPool;
  l.k = k;
  l.s = s;
  l.p = p;
  return l;
}

LayerSpec LayerSpec::adaptive_avgpool(std::size_t oh, std::size_t ow) {
  LayerSpec l;
  l.kind = LayerKind::AdaptiveAvgPool;
  l.oh = oh;
  l.ow = ow;
  return l;
}

LayerSpec LayerSpec::linear(std::size_t in_features, std::size_t out_features) {
  LayerSpec l;
  l.kind = LayerKind::Linear;
  l.in_features = in_features;
  l.out_features = out_features;
  return l;
}

LayerSpec LayerSpec::softmax() {
  LayerSpec l;
  l.kind = LayerKind::Softmax;
  return l;
}

void NetworkSpec::validate() const {
  int bottlenecks = 0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    const std::string where = "layer " + std::to_string(i) + " (" + to_string(l.kind) + "): ";
    switch (l.kind) {
      case LayerKind::Conv:
        if (l.oc == 0) throw ShapeError(where + "oc must be >= 1");
        [[fallthrough]];
      case LayerKind::MaxPool:
        if (l.k == 0) throw ShapeError(where + "k must be >= 1");
        if (l.s == 0) throw ShapeError(where + "s must be >= 1");
        break;
      case LayerKind::AdaptiveAvgPool:
        if (l.oh == 0 || l.ow == 0) throw ShapeError(where + "oh and ow must be >= 1");
        break;
      case LayerKind::Linear:
        if (l.in_features == 0 || l.out_features == 0) throw ShapeError(where + "features must be >= 1");
        break;
      default:
        break;
    }
    if (l.bottleneck) ++bottlenecks;
  }
  if (bottlenecks > 1) throw ShapeError("network '" + name + "' flags more than one bottleneck layer");
}

Shape output_shape(const LayerSpec& layer, const Shape& in) {
  if (in.empty()) throw ShapeError("output_shape: empty input shape");
  switch (layer.kind) {
    case LayerKind::Conv:
    case LayerKind::MaxPool: {
      require_chw(layer, in);
      if (layer.k == 0 || layer.s == 0) throw ShapeError("kernel and stride must be >= 1");
      const std::size_t c = layer.kind == LayerKind::Conv ? layer.oc : in[0];
      if (c == 0) throw ShapeError("conv oc must be >= 1");
      return Shape{c, window_extent(in[1], layer.k, layer.s, layer.p), window_extent(in[2], layer.k, layer.s, layer.p)};
    }
    case LayerKind::BatchNorm:
    case LayerKind::ReLU:
    case LayerKind::Softmax:
      return in;
    case LayerKind::AdaptiveAvgPool:
      require_chw(layer, in);
      if (layer.oh == 0 || layer.ow == 0) throw ShapeError("adaptive pool output must be >= 1");
      return Shape{in[0], layer.oh, layer.ow};
    case LayerKind::Linear:
      // Implicit flatten of the incoming activation.
      if (in.numel() != layer.in_features) {
        throw ShapeError("linear expects " + std::to_string(layer.in_features) + " input features, got " +
                         std::to_string(in.numel()) + " from " + in.str());
      }
      if (layer.out_features == 0) throw ShapeError("linear out_features must be >= 1");
      return Shape{layer.out_features};
  }
  throw ShapeError("unknown layer kind");
}

std::uint64_t layer_params(const LayerSpec& layer, const Shape& in) {
  switch (layer.kind) {
    case LayerKind::Conv: {
      const std::uint64_t w = static_cast<std::uint64_t>(in[0]) * layer.oc * layer.k * layer.k;
      return layer.bias ? w + layer.oc : w;
    }
    case LayerKind::BatchNorm:
      return 2ull * in[0];
    case LayerKind::Linear:
      return static_cast<std::uint64_t>(layer.in_features) * layer.out_features + layer.out_features;
    default:
      return 0;
  }
}

ShapeTrace trace(const NetworkSpec& net, const Shape& in_shape) {
  net.validate();
  ShapeTrace t;
  t.input = in_shape;
  t.outputs.reserve(net.layers.size());
  Shape cur = in_shape;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& layer = net.layers[i];
    try {
      Shape next = output_shape(layer, cur);
      t.params += layer_params(layer, cur);
      cur = std::move(next);
    } catch (const ShapeError& e) {
      throw ShapeError("layer " + std::to_string(i) + " (" + to_string(layer.kind) + "): " + e.what());
    }
    if (layer.bottleneck) {
      t.bottleneck = cur;
      t.bottleneck_index = i;
    }
    t.outputs.push_back(cur);
  }
  return t;
}

std::uint64_t param_count(const NetworkSpec& net, const Shape& in_shape) { return trace(net, in_shape).params; }

double tensor_ratio(const Shape& bottleneck, const Shape& input) {
  return static_cast<double>(bottleneck.numel()) / static_cast<double>(input.numel());
}

NetworkSpec resnet_stem() {
  return {"resnet_stem",
          {LayerSpec::conv(64, 7, 2, 3), LayerSpec::batchnorm(), LayerSpec::relu(), LayerSpec::maxpool(3, 2, 1)}};
}

NetworkSpec teacher_l1_block() {
  using L = LayerSpec;
  return {"teacher_l1_block",
          {
              L::conv(64, 1, 1),    L::batchnorm(), L::conv(64, 3, 1, 1), L::batchnorm(), L::conv(256, 1, 1),
              L::batchnorm(),       L::conv(256, 1, 1), L::batchnorm(),   L::relu(),      L::conv(64, 1, 1),
              L::batchnorm(),       L::conv(64, 3, 1, 1), L::batchnorm(), L::conv(256, 1, 1), L::batchnorm(),
              L::relu(),            L::conv(64, 1, 1), L::batchnorm(),    L::conv(64, 3, 1, 1), L::batchnorm(),
              L::conv(256, 1, 1),   L::batchnorm(), L::relu(),
          }};
}

NetworkSpec student_l1_block() {
  using L = LayerSpec;
  return {"student_l1_block",
          {
              L::conv(64, 2, 1, 1),  L::batchnorm(), L::conv(256, 2, 1, 1), L::batchnorm(),
              L::relu(),             L::conv(64, 2, 1, 1), L::batchnorm(),
              L::conv(3, 2, 1, 1).as_bottleneck(),
              L::batchnorm(),        L::relu(),      L::conv(64, 2),        L::batchnorm(),
              L::conv(128, 2),       L::batchnorm(), L::relu(),             L::conv(256, 2),
              L::batchnorm(),        L::conv(256, 2), L::batchnorm(),       L::relu(),
          }};
}

namespace {

NetworkSpec concat(std::string name, const NetworkSpec& a, const NetworkSpec& b) {
  NetworkSpec out{std::move(name), a.layers};
  out.layers.insert(out.layers.end(), b.layers.begin(), b.layers.end());
  return out;
}

}  // namespace

NetworkSpec teacher_l1() { return concat("teacher_l1", resnet_stem(), teacher_l1_block()); }

NetworkSpec student_l1() { return concat("student_l1", resnet_stem(), student_l1_block()); }

NetworkSpec neural_filter() {
  using L = LayerSpec;
  return {"neural_filter",
          {
              L::adaptive_avgpool(64, 64),
              L::conv(64, 4, 2), L::batchnorm(), L::relu(),
              L::conv(32, 3, 2), L::batchnorm(), L::relu(),
              L::conv(16, 2, 1), L::batchnorm(), L::relu(),
              L::adaptive_avgpool(8, 8),
              L::linear(1024, 2), L::softmax(),
          }};
}

std::vector<std::string> fixture_names() {
  return {"resnet_stem", "teacher_l1_block", "student_l1_block", "teacher_l1", "student_l1", "neural_filter"};
}

NetworkSpec fixture(const std::string& name) {
  if (name == "resnet_stem") return resnet_stem();
  if (name == "teacher_l1_block") return teacher_l1_block();
  if (name == "student_l1_block") return student_l1_block();
  if (name == "teacher_l1") return teacher_l1();
  if (name == "student_l1") return student_l1();
  if (name == "neural_filter") return neural_filter();
  throw ArgumentError("unknown network fixture '" + name + "'");
}

void to_json(nlohmann::json& j, const LayerSpec& l) {
  j = nlohmann::json{{"kind", to_string(l.kind)}};
  switch (l.kind) {
    case LayerKind::Conv:
      j["oc"] = l.oc;
      j["k"] = l.k;
      j["s"] = l.s;
      j["p"] = l.p;
      if (l.bias) j["bias"] = true;
      break;
    case LayerKind::MaxPool:
      j["k"] = l.k;
      j["s"] = l.s;
      j["p"] = l.p;
      break;
    case LayerKind::AdaptiveAvgPool:
      j["oh"] = l.oh;
      j["ow"] = l.ow;
      break;
    case LayerKind::Linear:
      j["in_features"] = l.in_features;
      j["out_features"] = l.out_features;
      break;
    default:
      break;
  }
  if (l.bottleneck) j["bottleneck"] = true;
}

void from_json(const nlohmann::json& j, LayerSpec& l) {
  l = LayerSpec{};
  l.kind = layer_kind_from_string(j.at("kind").get<std::string>());
  l.oc = j.value("oc", std::size_t{0});
  l.k = j.value("k", std::size_t{1});
  l.s = j.value("s", std::size_t{1});
  l.p = j.value("p", std::size_t{0});
  l.oh = j.value("oh", std::size_t{0});
  l.ow = j.value("ow", std::size_t{0});
  l.in_features = j.value("in_features", std::size_t{0});
  l.out_features = j.value("out_features", std::size_t{0});
  l.bias = j.value("bias", false);
  l.bottleneck = j.value("bottleneck", false);
}

void to_json(nlohmann::json& j, const NetworkSpec& net) { j = nlohmann::json{{"name", net.name}, {"layers", net.layers}}; }

void from_json(const nlohmann::json& j, NetworkSpec& net) {
  net.name = j.value("name", std::string{});
  net.layers = j.at("layers").get<std::vector<LayerSpec>>();
  net.validate();
}

}  // namespace splitwire::netspec
