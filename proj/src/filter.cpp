// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#include "splitwire/filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "splitwire/errors.hpp"

namespace splitwire::pipeline {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

Decision filter_decide(double score, double threshold) {
  if (!(score >= 0.0 && score <= 1.0)) throw RangeError("filter score must be in [0, 1]");
  return score < threshold ? Decision::Drop : Decision::Keep;
}

void FilterModel::validate() const {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("filter threshold must be in [0, 1]");
  if (!(p_empty >= 0.0 && p_empty <= 1.0)) throw ConfigError("p_empty must be in [0, 1]");
  if (!(sigma_empty > 0.0) || !(sigma_nonempty > 0.0)) throw ConfigError("filter sigmas must be > 0");
  if (!std::isfinite(mean_empty) || !std::isfinite(mean_nonempty)) throw ConfigError("filter means must be finite");
}

double FilterModel::sample_score(bool empty, std::mt19937_64& rng) const {
  std::normal_distribution<double> dist(empty ? mean_empty : mean_nonempty, empty ? sigma_empty : sigma_nonempty);
  return logistic(dist(rng));
}

double FilterModel::drop_probability(bool empty) const {
  if (threshold <= 0.0) return 0.0;
  if (threshold >= 1.0) return 1.0;
  const double cut = std::log(threshold / (1.0 - threshold));
  const double mean = empty ? mean_empty : mean_nonempty;
  const double sigma = empty ? sigma_empty : sigma_nonempty;
  return normal_cdf((cut - mean) / sigma);
}

double FilterModel::expected_drop_rate() const {
  return p_empty * drop_probability(true) + (1.0 - p_empty) * drop_probability(false);
}

double FilterModel::analytic_auc() const {
  return normal_cdf((mean_nonempty - mean_empty) / std::hypot(sigma_empty, sigma_nonempty));
}

GateMetrics gate_metrics(const FilterModel& fm, std::size_t n, std::uint64_t seed) {
  fm.validate();
  if (n == 0) throw ArgumentError("gate_metrics: n must be >= 1");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution is_empty(fm.p_empty);

  std::vector<double> scores(n);
  std::vector<char> empty(n);
  std::size_t dropped = 0, dropped_empty = 0, dropped_nonempty = 0, n_empty = 0;
  for (std::size_t i = 0; i < n; ++i) {
    empty[i] = is_empty(rng);
    scores[i] = fm.sample_score(empty[i], rng);
    const bool drop = filter_decide(scores[i], fm.threshold) == Decision::Drop;
    n_empty += empty[i] ? 1 : 0;
    if (drop) {
      ++dropped;
      (empty[i] ? dropped_empty : dropped_nonempty)++;
    }
  }

  GateMetrics m;
  m.n = n;
  m.n_empty = n_empty;
  const std::size_t n_nonempty = n - n_empty;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  m.drop_rate = static_cast<double>(dropped) / static_cast<double>(n);
  m.recall_nonempty = n_nonempty ? 1.0 - static_cast<double>(dropped_nonempty) / n_nonempty : nan;
  m.false_negative_rate = n_nonempty ? static_cast<double>(dropped_nonempty) / n_nonempty : nan;
  m.empty_drop_rate = n_empty ? static_cast<double>(dropped_empty) / n_empty : nan;

  if (n_empty == 0 || n_nonempty == 0) {
    m.empirical_auc = nan;
    return m;
  }
  // Rank-sum AUC with average ranks for ties; positives are non-empty images.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum_pos = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (!empty[order[k]]) rank_sum_pos += avg_rank;
    }
    i = j + 1;
  }
  const double np = static_cast<double>(n_nonempty);
  const double nn = static_cast<double>(n_empty);
  m.empirical_auc = (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
  return m;
}

}  // namespace splitwire::pipeline
