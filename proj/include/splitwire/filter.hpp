// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace splitwire::pipeline {

enum class Decision { Keep, Drop };

/// Drop iff score < threshold. Scores outside [0, 1] raise RangeError.
Decision filter_decide(double score, double threshold);

/// Prefilter score model. The latent logit of an image is Gaussian with a
/// class-dependent mean; the filter emits logistic(latent) as its
/// "contains an object" probability. Equal spreads give
/// AUC = Phi((mean_nonempty - mean_empty) / (sigma * sqrt(2))).
struct FilterModel {
  double threshold = 0.1;
  double p_empty = 0.46;
  double mean_empty = 0.0;
  double mean_nonempty = 1.977;
  double sigma_empty = 1.0;
  double sigma_nonempty = 1.0;

  void validate() const;

  /// Draws a score for an image of the given class.
  double sample_score(bool empty, std::mt19937_64& rng) const;

  /// P(score < threshold | class), from the Gaussian CDF.
  double drop_probability(bool empty) const;
  /// p_empty * P(drop | empty) + (1 - p_empty) * P(drop | non-empty).
  double expected_drop_rate() const;
  /// Closed-form ROC-AUC of the score distributions.
  double analytic_auc() const;
};

struct GateMetrics {
  std::size_t n = 0;
  std::size_t n_empty = 0;
  double drop_rate = 0.0;
  double recall_nonempty = 0.0;      // kept non-empty / non-empty
  double false_negative_rate = 0.0;  // dropped non-empty / non-empty
  double empty_drop_rate = 0.0;      // dropped empty / empty
  double empirical_auc = 0.0;        // Mann-Whitney rank statistic
};

/// Monte Carlo over n (class, score) draws; deterministic per seed.
/// Classes with no samples yield recall/AUC of NaN.
GateMetrics gate_metrics(const FilterModel& fm, std::size_t n, std::uint64_t seed);

double logistic(double x);
double normal_cdf(double x);

}  // namespace splitwire::pipeline
