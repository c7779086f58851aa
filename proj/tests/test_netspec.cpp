// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <string>

#include "splitwire/errors.hpp"
#include "splitwire/netspec.hpp"

using namespace splitwire;
using namespace splitwire::netspec;

namespace {

// Independent conv/pool extent formula.
std::size_t out_extent(std::size_t in, std::size_t k, std::size_t s, std::size_t p) { return (in + 2 * p - k) / s + 1; }

}  // namespace

TEST_SUITE("netspec") {
  TEST_CASE("single-layer shape arithmetic") {
    CHECK(output_shape(LayerSpec::conv(64, 7, 2, 3), Shape{3, 874, 1044}) == Shape{64, 437, 522});
    CHECK(output_shape(LayerSpec::relu(), Shape{3, 10, 10}) == Shape{3, 10, 10});
    CHECK_THROWS_AS(output_shape(LayerSpec::conv(8, 5), Shape{3, 3, 3}), ShapeError);
    CHECK(output_shape(LayerSpec::adaptive_avgpool(8, 8), Shape{16, 14, 14}) == Shape{16, 8, 8});
    CHECK(output_shape(LayerSpec::linear(1024, 2), Shape{16, 8, 8}) == Shape{2});
    CHECK_THROWS_AS(output_shape(LayerSpec::linear(1000, 2), Shape{16, 8, 8}), ShapeError);
    CHECK_THROWS_AS(output_shape(LayerSpec::conv(8, 1), Shape{3, 3}), ShapeError);
  }

  TEST_CASE("random conv layers agree with the extent formula") {
    for (std::size_t h = 1; h < 40; h += 3) {
      for (std::size_t k = 1; k <= 5; ++k) {
        for (std::size_t s = 1; s <= 3; ++s) {
          for (std::size_t p = 0; p <= 2; ++p) {
            const Shape in{2, h, h + 1};
            if (h + 2 * p < k) {
              CHECK_THROWS_AS(output_shape(LayerSpec::conv(4, k, s, p), in), ShapeError);
              continue;
            }
            const Shape out = output_shape(LayerSpec::conv(4, k, s, p), in);
            CHECK(out == Shape{4, out_extent(h, k, s, p), out_extent(h + 1, k, s, p)});
          }
        }
      }
    }
  }

  TEST_CASE("stem trace from the average image shape") {
    const auto tr = trace(resnet_stem(), Shape{3, 874, 1044});
    // conv 874 -> 437 -> pool 219; 1044 -> 522 -> 261
    CHECK(tr.output() == Shape{64, out_extent(out_extent(874, 7, 2, 3), 3, 2, 1),
                               out_extent(out_extent(1044, 7, 2, 3), 3, 2, 1)});
    CHECK(tr.output() == Shape{64, 219, 261});
    CHECK(tr.outputs.size() == 4);
  }

  TEST_CASE("student L1 bottleneck and ratio") {
    const Shape in{3, 874, 1044};
    const auto tr = trace(student_l1(), in);
    REQUIRE(tr.bottleneck);
    // Four k=2,p=1 convs after the stem each add one row and column.
    CHECK(*tr.bottleneck == Shape{3, 219 + 4, 261 + 4});
    CHECK(tr.bottleneck->numel() == 177285);
    CHECK(tensor_ratio(*tr.bottleneck, in) == doctest::Approx(177285.0 / 2737368.0));
    CHECK(std::abs(tensor_ratio(*tr.bottleneck, in) - 0.0657) <= 0.003);
    // Four k=2,p=0 convs after the bottleneck return to the teacher extents.
    CHECK(tr.output() == Shape{256, 219, 261});
    CHECK(tr.outputs.size() == student_l1().layers.size());
  }

  TEST_CASE("student ratio stays within 6-7% for any shorter side of 800") {
    for (std::size_t longer = 800; longer <= 1333; ++longer) {
      for (const Shape in : {Shape{3, 800, longer}, Shape{3, longer, 800}}) {
        const auto tr = trace(student_l1(), in);
        const double r = tensor_ratio(*tr.bottleneck, in);
        CAPTURE(in.str());
        REQUIRE(r >= 0.06);
        REQUIRE(r <= 0.07);
      }
    }
  }

  TEST_CASE("tiny inputs still trace through the student") {
    const auto tr = trace(student_l1(), Shape{3, 1, 1});
    CHECK(tr.output().numel() >= 1);
    CHECK(*tr.bottleneck == Shape{3, 5, 5});
  }

  TEST_CASE("teacher L1 block preserves spatial extents") {
    for (const Shape in : {Shape{64, 219, 261}, Shape{64, 7, 3}, Shape{64, 1, 1}}) {
      const auto tr = trace(teacher_l1_block(), in);
      CHECK(tr.output() == Shape{256, in[1], in[2]});
    }
  }

  TEST_CASE("parameter counts") {
    CHECK(layer_params(LayerSpec::conv(3, 2), Shape{64, 10, 10}) == 768);
    CHECK(layer_params(LayerSpec::batchnorm(), Shape{64, 10, 10}) == 128);
    CHECK(layer_params(LayerSpec::linear(1024, 2), Shape{1024}) == 2050);
    auto biased = LayerSpec::conv(3, 2);
    biased.bias = true;
    CHECK(layer_params(biased, Shape{64, 10, 10}) == 771);
    CHECK(layer_params(LayerSpec::maxpool(3, 2, 1), Shape{64, 10, 10}) == 0);

    // Hand totals: stem 3*64*49 + 128; block convs 574976 plus batchnorms 2182.
    CHECK(param_count(student_l1(), Shape{3, 874, 1044}) == 9536 + 574976 + 2182);
    // Filter: 3*64*16 + 128 + 64*32*9 + 64 + 32*16*4 + 32 + 1024*2 + 2.
    CHECK(param_count(neural_filter(), Shape{3, 874, 1044}) == 25826);
  }

  TEST_CASE("neural filter ends in two class scores") {
    const auto tr = trace(neural_filter(), Shape{3, 874, 1044});
    CHECK(tr.output() == Shape{2});
    CHECK_FALSE(tr.bottleneck);
  }

  TEST_CASE("empty network traces to its input") {
    const auto tr = trace(NetworkSpec{"empty", {}}, Shape{3, 4, 5});
    CHECK(tr.output() == Shape{3, 4, 5});
    CHECK(tr.params == 0);
    CHECK(tr.outputs.empty());
  }

  TEST_CASE("ratio arithmetic") {
    CHECK(tensor_ratio(Shape{3, 4}, Shape{3, 4}) == 1.0);
    CHECK(tensor_ratio(Shape{3, 1, 1}, Shape{3, 10, 10}) == doctest::Approx(0.01));
  }

  TEST_CASE("validation and trace errors name the layer") {
    NetworkSpec two{"two", {LayerSpec::conv(3, 1).as_bottleneck(), LayerSpec::conv(3, 1).as_bottleneck()}};
    CHECK_THROWS_AS(two.validate(), ShapeError);
    NetworkSpec zero_k{"zk", {LayerSpec::conv(3, 0)}};
    CHECK_THROWS_AS(zero_k.validate(), ShapeError);
    NetworkSpec too_big{"big", {LayerSpec::relu(), LayerSpec::conv(4, 9)}};
    try {
      trace(too_big, Shape{3, 4, 4});
      FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
      CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
    }
  }

  TEST_CASE("json round trip uses the published field names") {
    for (const auto& name : fixture_names()) {
      const NetworkSpec net = fixture(name);
      const nlohmann::json j = net;
      const auto back = j.get<NetworkSpec>();
      CHECK(back.layers == net.layers);
    }
    const auto j = nlohmann::json::parse(R"({"layers":[{"kind":"conv","oc":3,"k":2,"p":1,"bottleneck":true}]})");
    const auto net = j.get<NetworkSpec>();
    REQUIRE(net.layers.size() == 1);
    CHECK(net.layers[0].s == 1);
    CHECK(net.layers[0].bottleneck);
    CHECK_THROWS(nlohmann::json::parse(R"({"layers":[{"kind":"deconv"}]})").get<NetworkSpec>());
    CHECK_THROWS_AS(fixture("nope"), ArgumentError);
  }
}
