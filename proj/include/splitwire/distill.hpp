// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "splitwire/tensor.hpp"

namespace splitwire::distill {

/// One term of the multi-tap mimicking loss: lambda * ||teacher_out - student_out||^2.
struct TapPoint {
  std::size_t index = 0;
  double lambda = 1.0;
  Tensor teacher_out;
  Tensor student_out;
};

struct LossOptions {
  /// Divide each tap's SSE by its element count. Off by default (plain SSE).
  bool normalize_by_numel = false;
};

/// Sum of squared errors between teacher and student activations.
double sse_loss(const Tensor& teacher_out, const Tensor& student_out);

/// sum_j lambda_j * sse(t_j, s_j). Throws ArgumentError on an empty tap list,
/// ShapeError on mismatched tap shapes, RangeError on negative lambda.
double generalized_loss(std::span<const TapPoint> taps, LossOptions opts = {});

/// d loss / d student_out for each tap: 2 * lambda_j * (s_j - t_j).
std::vector<Tensor> loss_grad(std::span<const TapPoint> taps, LossOptions opts = {});

// Toy heads ------------------------------------------------------------------

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  static Matrix identity(std::size_t n);
  Matrix transposed() const;
};

Matrix matmul(const Matrix& a, const Matrix& b);

/// y = W x + b
struct AffineLayer {
  Matrix weight;              // out x in
  std::vector<double> bias;   // out
  std::size_t in_dim() const { return weight.cols; }
  std::size_t out_dim() const { return weight.rows; }
};

/// A stack of affine maps. Tap indices name layers whose outputs enter the loss.
struct ToyHead {
  std::vector<AffineLayer> layers;
  std::vector<std::size_t> taps;
  std::optional<std::size_t> bottleneck_index;

  std::size_t input_dim() const;
  /// Layers compose, taps are in range and strictly increasing, and the
  /// bottleneck layer is narrower than its neighbours.
  void validate() const;
  /// Activations after every layer (size == layers.size()).
  std::vector<std::vector<double>> forward(std::span<const double> x) const;
  /// Collapses the stack into a single affine map (weight, bias).
  AffineLayer compose() const;
};

/// Layer widths for a student: widths[0] is the input, layer l maps
/// widths[l] -> widths[l + 1].
struct ToyTopology {
  std::vector<std::size_t> widths;
  std::vector<std::size_t> taps;
  std::optional<std::size_t> bottleneck_index;
};

/// Seeded uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
ToyHead init_head(const ToyTopology& topo, std::uint64_t seed);

struct TrainConfig {
  int epochs = 20;
  std::size_t batch_size = 4;
  double lr0 = 1e-3;
  double lr_decay_factor = 0.1;
  std::vector<int> decay_epochs{5, 15};
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  /// Per-tap lambda; empty means 1 for every tap.
  std::vector<double> lambdas;
  LossOptions loss;

  void validate() const;
  /// Learning rate in effect during `epoch` (1-based).
  double lr_at(int epoch) const;
};

struct EpochStat {
  int epoch = 0;
  double mean_loss = 0.0;  // epoch loss summed over batches, divided by dataset size
  double lr = 0.0;
};

struct TrainResult {
  ToyHead student;
  std::vector<EpochStat> history;
  /// Generalized loss summed over the whole dataset after training.
  double final_loss = 0.0;
};

/// Loss of `student` against frozen `teacher`, summed over every sample.
double dataset_loss(const ToyHead& teacher, const ToyHead& student, std::span<const Tensor> dataset,
                    std::span<const double> lambdas = {}, LossOptions opts = {});

/// Adam over the student parameters only; teacher is read-only.
TrainResult train_toy(const ToyHead& teacher, const ToyTopology& student_spec, std::span<const Tensor> dataset,
                      const TrainConfig& cfg);

void write_history_csv(std::ostream& os, std::span<const EpochStat> history);

// Oracle ---------------------------------------------------------------------

/// Singular values (descending) by one-sided Jacobi rotations.
std::vector<double> singular_values(const Matrix& m);

/// min over rank-b linear S of sum_x ||A x - S x||^2 = sum_{i>b} sigma_i(A X^T)^2.
/// `samples` holds one sample per row.
double eckart_young_bound(const Matrix& a, const Matrix& samples, std::size_t b);

// Fixtures -------------------------------------------------------------------

struct ToyFixture {
  std::string name;
  ToyHead teacher;
  ToyTopology student;
  std::vector<Tensor> dataset;  // zero-mean columns
  TrainConfig cfg;
  /// Effective linear map of the single-tap teacher, when the bound applies.
  std::optional<Matrix> teacher_map;
  std::size_t bottleneck_width = 0;
  std::size_t teacher_rank = 0;
};

/// "linear_full" (width >= rank), "linear_lowrank" (width < rank), "multi_tap".
ToyFixture toy_fixture(const std::string& name, std::uint64_t seed = 7);
std::vector<std::string> toy_fixture_names();

/// Stacks dataset tensors into an N x d matrix.
Matrix samples_matrix(std::span<const Tensor> dataset);

}  // namespace splitwire::distill
