// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#include "splitwire/distill.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "splitwire/errors.hpp"

namespace splitwire::distill {

namespace {

template <typename T>
double sse_span(std::span<const T> a, std::span<const T> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return acc;
}

void check_taps(std::span<const TapPoint> taps) {
  if (taps.empty()) throw ArgumentError("generalized_loss: no tap points");
  for (const TapPoint& tap : taps) {
    if (tap.teacher_out.shape() != tap.student_out.shape()) {
      throw ShapeError("tap " + std::to_string(tap.index) + ": teacher " + tap.teacher_out.shape().str() +
                       " vs student " + tap.student_out.shape().str());
    }
    if (!(tap.lambda >= 0.0) || !std::isfinite(tap.lambda)) {
      throw RangeError("tap " + std::to_string(tap.index) + ": lambda must be finite and >= 0");
    }
  }
}

double tap_weight(double lambda, std::size_t numel, const LossOptions& opts) {
  return opts.normalize_by_numel ? lambda / static_cast<double>(numel) : lambda;
}

std::vector<double> to_double(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

double lambda_for(std::span<const double> lambdas, std::size_t j) { return lambdas.empty() ? 1.0 : lambdas[j]; }

void check_alignment(const ToyHead& teacher, const ToyHead& student) {
  if (teacher.taps.size() != student.taps.size()) {
    throw ShapeError("teacher exposes " + std::to_string(teacher.taps.size()) + " taps, student " +
                     std::to_string(student.taps.size()));
  }
  if (teacher.taps.empty()) throw ShapeError("no taps to distill");
  if (teacher.input_dim() != student.input_dim()) throw ShapeError("teacher and student input widths differ");
  for (std::size_t j = 0; j < teacher.taps.size(); ++j) {
    const auto t_dim = teacher.layers[teacher.taps[j]].out_dim();
    const auto s_dim = student.layers[student.taps[j]].out_dim();
    if (t_dim != s_dim) {
      throw ShapeError("tap " + std::to_string(j) + ": teacher width " + std::to_string(t_dim) + " vs student " +
                       std::to_string(s_dim));
    }
  }
}

}  // namespace

double sse_loss(const Tensor& teacher_out, const Tensor& student_out) {
  if (teacher_out.shape() != student_out.shape()) {
    throw ShapeError("sse_loss: " + teacher_out.shape().str() + " vs " + student_out.shape().str());
  }
  return sse_span(teacher_out.data(), student_out.data());
}

double generalized_loss(std::span<const TapPoint> taps, LossOptions opts) {
  check_taps(taps);
  double total = 0.0;
  for (const TapPoint& tap : taps) {
    total += tap_weight(tap.lambda, tap.student_out.numel(), opts) * sse_loss(tap.teacher_out, tap.student_out);
  }
  return total;
}

std::vector<Tensor> loss_grad(std::span<const TapPoint> taps, LossOptions opts) {
  check_taps(taps);
  std::vector<Tensor> grads;
  grads.reserve(taps.size());
  for (const TapPoint& tap : taps) {
    const double w = 2.0 * tap_weight(tap.lambda, tap.student_out.numel(), opts);
    std::vector<float> g(tap.student_out.numel());
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] = static_cast<float>(w * (static_cast<double>(tap.student_out[i]) - tap.teacher_out[i]));
    }
    grads.emplace_back(tap.student_out.shape(), std::move(g));
  }
  return grads;
}

// Matrix ---------------------------------------------------------------------

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols, rows);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw ShapeError("matmul: inner dimensions differ");
  Matrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols; ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

// ToyHead --------------------------------------------------------------------

std::size_t ToyHead::input_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }

void ToyHead::validate() const {
  if (layers.empty()) throw ShapeError("toy head has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.weight.rows == 0 || layer.weight.cols == 0) throw ShapeError("layer " + std::to_string(l) + " is empty");
    if (layer.weight.data.size() != layer.weight.rows * layer.weight.cols) {
      throw ShapeError("layer " + std::to_string(l) + " weight storage mismatch");
    }
    if (layer.bias.size() != layer.out_dim()) throw ShapeError("layer " + std::to_string(l) + " bias width mismatch");
    if (l > 0 && layers[l - 1].out_dim() != layer.in_dim()) {
      throw ShapeError("layer " + std::to_string(l) + " input width does not match previous output");
    }
  }
  for (std::size_t j = 0; j < taps.size(); ++j) {
    if (taps[j] >= layers.size()) throw ShapeError("tap index out of range");
    if (j > 0 && taps[j] <= taps[j - 1]) throw ShapeError("tap indices must be strictly increasing");
  }
  if (bottleneck_index) {
    const std::size_t b = *bottleneck_index;
    if (b >= layers.size()) throw ShapeError("bottleneck index out of range");
    const std::size_t width = layers[b].out_dim();
    const bool narrower_than_input = width < layers[b].in_dim();
    const bool narrower_than_next = b + 1 >= layers.size() || width < layers[b + 1].out_dim();
    if (!narrower_than_input || !narrower_than_next) {
      throw ShapeError("bottleneck layer must be narrower than its neighbours");
    }
  }
}

std::vector<std::vector<double>> ToyHead::forward(std::span<const double> x) const {
  if (x.size() != input_dim()) throw ShapeError("forward: input width mismatch");
  std::vector<std::vector<double>> acts;
  acts.reserve(layers.size());
  std::span<const double> cur = x;
  for (const auto& layer : layers) {
    std::vector<double> y(layer.bias);
    for (std::size_t r = 0; r < layer.out_dim(); ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < layer.in_dim(); ++c) acc += layer.weight(r, c) * cur[c];
      y[r] += acc;
    }
    acts.push_back(std::move(y));
    cur = acts.back();
  }
  return acts;
}

AffineLayer ToyHead::compose() const {
  validate();
  AffineLayer acc{layers.front().weight, layers.front().bias};
  for (std::size_t l = 1; l < layers.size(); ++l) {
    const auto& next = layers[l];
    AffineLayer out{matmul(next.weight, acc.weight), next.bias};
    for (std::size_t r = 0; r < next.out_dim(); ++r)
      for (std::size_t c = 0; c < next.in_dim(); ++c) out.bias[r] += next.weight(r, c) * acc.bias[c];
    acc = std::move(out);
  }
  return acc;
}

ToyHead init_head(const ToyTopology& topo, std::uint64_t seed) {
  if (topo.widths.size() < 2) throw ShapeError("topology needs at least one layer");
  std::mt19937_64 rng(seed);
  ToyHead head;
  for (std::size_t l = 0; l + 1 < topo.widths.size(); ++l) {
    const std::size_t in = topo.widths[l];
    const std::size_t out = topo.widths[l + 1];
    if (in == 0 || out == 0) throw ShapeError("topology widths must be >= 1");
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    AffineLayer layer{Matrix(out, in), std::vector<double>(out, 0.0)};
    for (double& w : layer.weight.data) w = dist(rng);
    head.layers.push_back(std::move(layer));
  }
  head.taps = topo.taps;
  head.bottleneck_index = topo.bottleneck_index;
  head.validate();
  return head;
}

// Training -------------------------------------------------------------------

void TrainConfig::validate() const {
  if (epochs < 1) throw ArgumentError("epochs must be >= 1");
  if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
  if (!(lr0 > 0.0)) throw ArgumentError("lr0 must be > 0");
  if (!(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0)) throw ArgumentError("lr_decay_factor must be in (0, 1]");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ArgumentError("adam betas must be in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw ArgumentError("adam_eps must be > 0");
  for (double l : lambdas) {
    if (!(l >= 0.0)) throw ArgumentError("lambdas must be >= 0");
  }
}

double TrainConfig::lr_at(int epoch) const {
  double lr = lr0;
  for (int e : decay_epochs) {
    if (epoch > e) lr *= lr_decay_factor;
  }
  return lr;
}

namespace {

// Accumulates loss and parameter gradients for one sample.
double accumulate_sample(const ToyHead& student, const std::vector<std::vector<double>>& teacher_acts,
                         const ToyHead& teacher, std::span<const double> x, std::span<const double> lambdas,
                         const LossOptions& opts, std::vector<AffineLayer>& grads) {
  const auto acts = student.forward(x);
  const std::size_t n_layers = student.layers.size();

  double loss = 0.0;
  // Upstream gradient at each layer output, seeded by the tap residuals.
  std::vector<std::vector<double>> upstream(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) upstream[l].assign(student.layers[l].out_dim(), 0.0);
  for (std::size_t j = 0; j < student.taps.size(); ++j) {
    const auto& s = acts[student.taps[j]];
    const auto& t = teacher_acts[teacher.taps[j]];
    const double w = tap_weight(lambda_for(lambdas, j), s.size(), opts);
    loss += w * sse_span<double>(s, t);
    auto& g = upstream[student.taps[j]];
    for (std::size_t i = 0; i < s.size(); ++i) g[i] += 2.0 * w * (s[i] - t[i]);
  }

  for (std::size_t l = n_layers; l-- > 0;) {
    const auto& layer = student.layers[l];
    const auto& g = upstream[l];
    std::span<const double> in = l == 0 ? x : std::span<const double>(acts[l - 1]);
    auto& gl = grads[l];
    for (std::size_t r = 0; r < layer.out_dim(); ++r) {
      if (g[r] == 0.0) continue;
      gl.bias[r] += g[r];
      for (std::size_t c = 0; c < layer.in_dim(); ++c) gl.weight(r, c) += g[r] * in[c];
    }
    if (l > 0) {
      auto& prev = upstream[l - 1];
      for (std::size_t r = 0; r < layer.out_dim(); ++r) {
        if (g[r] == 0.0) continue;
        for (std::size_t c = 0; c < layer.in_dim(); ++c) prev[c] += layer.weight(r, c) * g[r];
      }
    }
  }
  return loss;
}

std::vector<AffineLayer> zeros_like(const ToyHead& head) {
  std::vector<AffineLayer> z;
  z.reserve(head.layers.size());
  for (const auto& l : head.layers) z.push_back({Matrix(l.out_dim(), l.in_dim()), std::vector<double>(l.out_dim())});
  return z;
}

struct AdamState {
  std::vector<AffineLayer> m;
  std::vector<AffineLayer> v;
  long step = 0;
};

void adam_update(std::vector<double>& param, std::vector<double>& grad, std::vector<double>& m, std::vector<double>& v,
                 double lr, const TrainConfig& cfg, double bc1, double bc2) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g;
    v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g * g;
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    param[i] -= lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    grad[i] = 0.0;
  }
}

}  // namespace

double dataset_loss(const ToyHead& teacher, const ToyHead& student, std::span<const Tensor> dataset,
                    std::span<const double> lambdas, LossOptions opts) {
  check_alignment(teacher, student);
  double total = 0.0;
  for (const Tensor& sample : dataset) {
    const auto x = to_double(sample);
    const auto t_acts = teacher.forward(x);
    const auto s_acts = student.forward(x);
    for (std::size_t j = 0; j < student.taps.size(); ++j) {
      const auto& s = s_acts[student.taps[j]];
      total += tap_weight(lambda_for(lambdas, j), s.size(), opts) * sse_span<double>(s, t_acts[teacher.taps[j]]);
    }
  }
  return total;
}

TrainResult train_toy(const ToyHead& teacher, const ToyTopology& student_spec, std::span<const Tensor> dataset,
                      const TrainConfig& cfg) {
  cfg.validate();
  teacher.validate();
  if (dataset.empty()) throw ArgumentError("train_toy: empty dataset");

  TrainResult result;
  result.student = init_head(student_spec, cfg.seed);
  ToyHead& student = result.student;
  check_alignment(teacher, student);
  if (!cfg.lambdas.empty() && cfg.lambdas.size() != student.taps.size()) {
    throw ArgumentError("lambdas must be empty or one per tap");
  }

  // The teacher is frozen: its activations are computed once.
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<std::vector<double>>> teacher_acts;
  inputs.reserve(dataset.size());
  for (const Tensor& sample : dataset) {
    if (sample.numel() != teacher.input_dim()) throw ShapeError("dataset sample width does not match the teacher input");
    inputs.push_back(to_double(sample));
    teacher_acts.push_back(teacher.forward(inputs.back()));
  }

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);

  auto grads = zeros_like(student);
  AdamState adam{zeros_like(student), zeros_like(student), 0};

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double lr = cfg.lr_at(epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        epoch_loss += accumulate_sample(student, teacher_acts[i], teacher, inputs[i], cfg.lambdas, cfg.loss, grads);
      }
      ++adam.step;
      const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(adam.step));
      const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(adam.step));
      for (std::size_t l = 0; l < student.layers.size(); ++l) {
        adam_update(student.layers[l].weight.data, grads[l].weight.data, adam.m[l].weight.data, adam.v[l].weight.data,
                    lr, cfg, bc1, bc2);
        adam_update(student.layers[l].bias, grads[l].bias, adam.m[l].bias, adam.v[l].bias, lr, cfg, bc1, bc2);
      }
    }
    result.history.push_back({epoch, epoch_loss / static_cast<double>(dataset.size()), lr});
  }

  result.final_loss = dataset_loss(teacher, student, dataset, cfg.lambdas, cfg.loss);
  return result;
}

void write_history_csv(std::ostream& os, std::span<const EpochStat> history) {
  const auto old_precision = os.precision(17);
  os << "epoch,mean_loss,lr\n";
  for (const auto& h : history) os << h.epoch << ',' << h.mean_loss << ',' << h.lr << '\n';
  os.precision(old_precision);
}

// Fixtures -------------------------------------------------------------------

Matrix samples_matrix(std::span<const Tensor> dataset) {
  if (dataset.empty()) return {};
  Matrix m(dataset.size(), dataset.front().numel());
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    if (dataset[r].numel() != m.cols) throw ShapeError("samples_matrix: ragged dataset");
    for (std::size_t c = 0; c < m.cols; ++c) m(r, c) = dataset[r][c];
  }
  return m;
}

namespace {

constexpr std::size_t kToyDim = 8;
constexpr std::size_t kToySamples = 256;

// Zero-mean dataset so that student biases cannot beat the rank bound.
std::vector<Tensor> centered_dataset(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<std::vector<float>> rows(n, std::vector<float>(dim));
  for (auto& row : rows)
    for (float& v : row) v = static_cast<float>(dist(rng));
  for (std::size_t c = 0; c < dim; ++c) {
    double mean = 0.0;
    for (const auto& row : rows) mean += row[c];
    mean /= static_cast<double>(n);
    for (auto& row : rows) row[c] = static_cast<float>(row[c] - mean);
  }
  std::vector<Tensor> out;
  out.reserve(n);
  for (auto& row : rows) out.emplace_back(Shape{dim}, std::move(row));
  return out;
}

// U diag(s) V^T with random orthonormal U, V (Gram-Schmidt on Gaussian draws).
Matrix random_orthonormal(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix q(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    for (std::size_t p = 0; p < c; ++p) {
      double dot = 0.0;
      for (std::size_t r = 0; r < n; ++r) dot += v[r] * q(r, p);
      for (std::size_t r = 0; r < n; ++r) v[r] -= dot * q(r, p);
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (std::size_t r = 0; r < n; ++r) q(r, c) = v[r] / norm;
  }
  return q;
}

Matrix spectrum_map(std::span<const double> sigma, std::mt19937_64& rng) {
  const std::size_t n = sigma.size();
  const Matrix u = random_orthonormal(n, rng);
  const Matrix v = random_orthonormal(n, rng);
  Matrix us(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) us(r, c) = u(r, c) * sigma[c];
  return matmul(us, v.transposed());
}

ToyHead single_layer_teacher(const Matrix& a) {
  ToyHead t;
  t.layers.push_back({a, std::vector<double>(a.rows, 0.0)});
  t.taps = {0};
  return t;
}

}  // namespace

std::vector<std::string> toy_fixture_names() { return {"linear_full", "linear_lowrank", "multi_tap"}; }

ToyFixture toy_fixture(const std::string& name, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ToyFixture fx;
  fx.name = name;
  fx.dataset = centered_dataset(kToySamples, kToyDim, seed + 1);
  fx.cfg.seed = seed;
  fx.cfg.batch_size = 16;
  fx.cfg.lr0 = 1e-2;
  fx.cfg.lr_decay_factor = 0.1;

  if (name == "linear_full" || name == "linear_lowrank") {
    const bool full = name == "linear_full";
    // rank 3 teacher vs width 4 student; rank 6 teacher vs width 2 student.
    const std::vector<double> sigma = full ? std::vector<double>{3.0, 2.0, 1.0, 0, 0, 0, 0, 0}
                                           : std::vector<double>{3.0, 2.0, 1.5, 1.0, 0.7, 0.4, 0, 0};
    fx.teacher_rank = full ? 3 : 6;
    fx.bottleneck_width = full ? 4 : 2;
    const Matrix a = spectrum_map(sigma, rng);
    fx.teacher = single_layer_teacher(a);
    fx.teacher_map = a;
    fx.student = {{kToyDim, fx.bottleneck_width, kToyDim}, {1}, 0};
    fx.cfg.epochs = 500;
    if (full) {
      fx.cfg.decay_epochs = {250, 400};
    } else {
      // Residual is nonzero at the optimum, so minibatch noise never vanishes:
      // a slow constant rate keeps the run in its descent phase for all 500 epochs.
      fx.cfg.lr0 = 3e-4;
      fx.cfg.decay_epochs = {};
    }
    return fx;
  }
  if (name == "multi_tap") {
    // Teacher: two full-width maps, both outputs tapped (an L1/L2-style chain).
    const std::vector<double> s1{3.0, 2.0, 1.0, 0.5, 0, 0, 0, 0};
    const std::vector<double> s2{1.5, 1.2, 1.0, 0.8, 0.6, 0.5, 0.4, 0.3};
    fx.teacher.layers.push_back({spectrum_map(s1, rng), std::vector<double>(kToyDim, 0.0)});
    fx.teacher.layers.push_back({spectrum_map(s2, rng), std::vector<double>(kToyDim, 0.0)});
    fx.teacher.taps = {0, 1};
    fx.teacher_rank = 4;
    fx.bottleneck_width = 4;
    fx.student = {{kToyDim, 4, kToyDim, kToyDim}, {1, 2}, 0};
    fx.cfg.epochs = 500;
    fx.cfg.decay_epochs = {250, 400};
    return fx;
  }
  throw ArgumentError("unknown toy fixture '" + name + "'");
}

}  // namespace splitwire::distill
