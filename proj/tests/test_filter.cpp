// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "splitwire/errors.hpp"
#include "splitwire/filter.hpp"

using namespace splitwire;
using namespace splitwire::pipeline;

TEST_SUITE("filter") {
  TEST_CASE("decision rule is strict less-than") {
    CHECK(filter_decide(0.05, 0.1) == Decision::Drop);
    CHECK(filter_decide(0.1, 0.1) == Decision::Keep);
    CHECK(filter_decide(0.0, 0.0) == Decision::Keep);
    CHECK_THROWS_AS(filter_decide(1.5, 0.1), RangeError);
    CHECK_THROWS_AS(filter_decide(-0.1, 0.1), RangeError);
  }

  TEST_CASE("default calibration gives the target AUC in closed form") {
    const FilterModel fm;
    CHECK(fm.analytic_auc() == doctest::Approx(oracle::phi(1.977 / std::sqrt(2.0))));
    CHECK(std::abs(fm.analytic_auc() - 0.919) < 5e-4);
  }

  TEST_CASE("empirical AUC at n = 1e5") {
    const auto m = gate_metrics(FilterModel{}, 100000, 1);
    CHECK(std::abs(m.empirical_auc - 0.919) <= 0.01);
  }

  TEST_CASE("drop rate lies in the 3-sigma binomial interval of the analytic rate") {
    for (double threshold : {0.1, 0.3, 0.5, 0.7}) {
      FilterModel fm;
      fm.threshold = threshold;
      // Independent evaluation: P(logistic(z) < th) = Phi((logit(th) - mu) / sigma).
      const double logit = std::log(threshold / (1 - threshold));
      const double p = fm.p_empty * oracle::phi((logit - fm.mean_empty) / fm.sigma_empty) +
                       (1 - fm.p_empty) * oracle::phi((logit - fm.mean_nonempty) / fm.sigma_nonempty);
      CHECK(fm.expected_drop_rate() == doctest::Approx(p));
      const std::size_t n = 100000;
      const auto m = gate_metrics(fm, n, 7);
      const double sd = std::sqrt(p * (1 - p) / static_cast<double>(n));
      CAPTURE(threshold);
      CHECK(std::abs(m.drop_rate - p) <= 3 * sd);
    }
  }

  TEST_CASE("threshold zero never drops") {
    FilterModel fm;
    fm.threshold = 0.0;
    const auto m = gate_metrics(fm, 10000, 2);
    CHECK(m.recall_nonempty == 1.0);
    CHECK(m.drop_rate == 0.0);
    CHECK(m.false_negative_rate == 0.0);
  }

  TEST_CASE("identical class distributions give chance-level AUC") {
    FilterModel fm;
    fm.mean_nonempty = fm.mean_empty;
    const auto m = gate_metrics(fm, 100000, 3);
    CHECK(std::abs(m.empirical_auc - 0.5) <= 0.01);
    CHECK(fm.analytic_auc() == doctest::Approx(0.5));
  }

  TEST_CASE("small and degenerate sample counts") {
    CHECK_THROWS_AS(gate_metrics(FilterModel{}, 0, 1), ArgumentError);
    const auto m = gate_metrics(FilterModel{}, 1, 1);
    CHECK(m.n == 1);
    CHECK((std::isnan(m.empirical_auc)));
  }

  TEST_CASE("metrics are deterministic per seed") {
    const auto a = gate_metrics(FilterModel{}, 5000, 4);
    const auto b = gate_metrics(FilterModel{}, 5000, 4);
    CHECK(a.drop_rate == b.drop_rate);
    CHECK(a.empirical_auc == b.empirical_auc);
  }

  TEST_CASE("model validation") {
    FilterModel fm;
    fm.threshold = 1.5;
    CHECK_THROWS_AS(fm.validate(), ConfigError);
    fm = FilterModel{};
    fm.sigma_empty = 0.0;
    CHECK_THROWS_AS(fm.validate(), ConfigError);
    fm = FilterModel{};
    fm.p_empty = -0.1;
    CHECK_THROWS_AS(fm.validate(), ConfigError);
  }
}
