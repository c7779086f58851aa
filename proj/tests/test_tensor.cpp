// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <vector>

#include "splitwire/errors.hpp"
#include "splitwire/tensor.hpp"

using namespace splitwire;

TEST_SUITE("tensor") {
  TEST_CASE("shape rejects zero extents and empty rank") {
    CHECK_THROWS_AS(Shape({2, 0}), ShapeError);
    CHECK_THROWS_AS(Shape(std::vector<std::size_t>{}), ShapeError);
    CHECK(Shape({3, 223, 265}).numel() == 177285);
    CHECK(Shape::parse("3x223x265") == Shape({3, 223, 265}));
    CHECK(Shape({3, 223, 265}).str() == "3x223x265");
    CHECK_THROWS(Shape::parse("3xx4"));
    CHECK_THROWS(Shape::parse("3x0"));
  }

  TEST_CASE("make_tensor copies values and checks length") {
    const std::vector<float> v{1.0f, 2.0f};
    const Tensor t = make_tensor(Shape{2}, v);
    CHECK(t.numel() == 2);
    CHECK(t[1] == 2.0f);
    const std::vector<float> five(5, 0.0f);
    CHECK_THROWS_AS(make_tensor(Shape{2, 3}, five), ShapeError);
  }

  TEST_CASE("non-finite values are rejected") {
    const std::vector<float> nan{std::numeric_limits<float>::quiet_NaN()};
    const std::vector<float> inf{std::numeric_limits<float>::infinity()};
    CHECK_THROWS_AS(make_tensor(Shape{1}, nan), ValueError);
    CHECK_THROWS_AS(make_tensor(Shape{1}, inf), ValueError);
  }

  TEST_CASE("sub and sq_sum arithmetic") {
    const Tensor a(Shape{2}, {1.0f, 2.0f});
    CHECK(sub(a, a) == Tensor(Shape{2}, {0.0f, 0.0f}));
    CHECK(sub(Tensor(Shape{1}, {3.0f}), Tensor(Shape{1}, {1.0f}))[0] == 2.0f);
    CHECK_THROWS_AS(sub(Tensor(Shape{2}, {1, 2}), Tensor(Shape{3}, {1, 2, 3})), ShapeError);
    CHECK(sq_sum(Tensor(Shape{3}, {0, 0, 0})) == 0.0);
    CHECK(sq_sum(a) == 5.0);
    CHECK(sq_sum(Tensor(Shape{1}, {-3.0f})) == 9.0);
  }

  TEST_CASE("sq_sum properties over random tensors") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const Tensor t = random_fill(Shape{4, 5, 6}, seed, -10.0f, 10.0f);
      CHECK(sq_sum(sub(t, t)) == 0.0);
      std::vector<float> flipped(t.data().begin(), t.data().end());
      for (float& x : flipped) x = -x;
      CHECK(sq_sum(Tensor(t.shape(), flipped)) == sq_sum(t));
      CHECK(sq_sum(t) > 0.0);
    }
  }

  TEST_CASE("random_fill is reproducible, seeded and bounded") {
    const Shape s{3, 17, 19};
    const Tensor a = random_fill(s, 1, -1.0f, 1.0f);
    const Tensor b = random_fill(s, 1, -1.0f, 1.0f);
    const Tensor c = random_fill(s, 2, -1.0f, 1.0f);
    CHECK(std::memcmp(a.data().data(), b.data().data(), a.numel() * sizeof(float)) == 0);
    CHECK_FALSE(a == c);
    for (float x : a.data()) {
      CHECK(x >= -1.0f);
      CHECK(x < 1.0f);
    }
    CHECK_THROWS_AS(random_fill(s, 1, 1.0f, 1.0f), RangeError);
    CHECK_THROWS_AS(random_fill(s, 1, 2.0f, 1.0f), RangeError);
  }

  TEST_CASE("random_fill stays below hi for a narrow float range") {
    const Tensor t = random_fill(Shape{10000}, 9, 1.0f, std::nextafter(1.0f, 2.0f));
    for (float x : t.data()) CHECK(x == 1.0f);
  }
}
