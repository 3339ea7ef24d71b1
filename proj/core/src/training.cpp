#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

#include "hddrul/neural.hpp"
#include "hddrul/rng.hpp"
#include "hddrul/text.hpp"
#include "param_visit.hpp"

namespace hddrul {
namespace {

void fill_uniform(Eigen::MatrixXd& m, double limit, Rng& rng) {
  // Row-major draw order, independent of Eigen's storage order.
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-limit, limit);
}

void init_cell(LstmCellParams& cell, Rng& rng) {
  const double gates = static_cast<double>(cell.bias.size());
  fill_uniform(cell.input_weights, std::sqrt(6.0 / (static_cast<double>(cell.input_size()) + gates)), rng);
  fill_uniform(cell.hidden_weights, std::sqrt(6.0 / (static_cast<double>(cell.hidden_size()) + gates)),
               rng);
  const auto hidden = static_cast<Eigen::Index>(cell.hidden_size());
  cell.bias.setZero();
  cell.bias.segment(static_cast<int>(Gate::forget) * hidden, hidden).setOnes();
}

}  // namespace

BiLstmModel make_model(Architecture architecture, std::size_t features, std::size_t timesteps,
                       std::size_t hidden) {
  if (features < 1 || timesteps < 1 || hidden < 1)
    throw ConfigError("model dimensions must all be >= 1");
  BiLstmModel model;
  model.architecture = architecture;
  model.features = features;
  model.timesteps = timesteps;
  model.config.architecture = architecture;
  model.config.hidden_size = hidden;
  model.params.forward = LstmCellParams::zeros(features, hidden);
  std::size_t dense_width = hidden;
  if (architecture == Architecture::bidirectional) {
    model.params.backward = LstmCellParams::zeros(features, hidden);
    dense_width *= 2;
  }
  model.params.dense.weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dense_width));
  return model;
}

void initialize(BiLstmModel& model, std::uint64_t seed) {
  Rng rng(seed);
  init_cell(model.params.forward, rng);
  if (model.params.backward) init_cell(*model.params.backward, rng);
  auto& w = model.params.dense.weights;
  const double limit = std::sqrt(6.0 / (static_cast<double>(w.size()) + 1.0));
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = rng.uniform(-limit, limit);
  model.params.dense.bias = 0.0;
}

double clip_global_norm(Parameters& grads, double max_norm) {
  double sq = 0.0;
  detail::visit_tensors(std::as_const(grads), [&](std::string_view, std::span<const double> v) {
    for (double x : v) sq += x * x;
  });
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    detail::visit_tensors(grads, [&](std::string_view, std::span<double> v) {
      for (double& x : v) x *= scale;
    });
  }
  return norm;
}

AdamState AdamState::for_params(const Parameters& params, const AdamConfig& config) {
  return {params.zeros_like(), params.zeros_like(), 0, config};
}

void adam_step(AdamState& state, Parameters& params, const Parameters& grads) {
  std::vector<std::span<double>> p, m, v;
  std::vector<std::span<const double>> g;
  detail::visit_tensors(params, [&](std::string_view, std::span<double> s) { p.push_back(s); });
  detail::visit_tensors(state.m, [&](std::string_view, std::span<double> s) { m.push_back(s); });
  detail::visit_tensors(state.v, [&](std::string_view, std::span<double> s) { v.push_back(s); });
  detail::visit_tensors(grads, [&](std::string_view, std::span<const double> s) { g.push_back(s); });
  if (p.size() != g.size() || p.size() != m.size() || p.size() != v.size())
    throw ConfigError("adam_step: parameter and gradient layouts differ");

  ++state.t;
  const auto& c = state.config;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k].size() != g[k].size()) throw ConfigError("adam_step: tensor size mismatch");
    for (std::size_t i = 0; i < p[k].size(); ++i) {
      m[k][i] = c.beta1 * m[k][i] + (1.0 - c.beta1) * g[k][i];
      v[k][i] = c.beta2 * v[k][i] + (1.0 - c.beta2) * g[k][i] * g[k][i];
      const double m_hat = m[k][i] / correction1;
      const double v_hat = v[k][i] / correction2;
      p[k][i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

TrainResult train(const TrainConfig& config, const WindowedDataset& data) {
  if (data.samples == 0) throw DataError("cannot train on an empty dataset");
  if (config.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  TrainResult result{make_model(config.architecture, data.features, data.timesteps,
                                config.hidden_size),
                     {}};
  auto& model = result.model;
  model.config = config;
  model.attributes = data.attributes;
  initialize(model, derive_seed(config.seed, "init"));

  AdamState adam = AdamState::for_params(model.params, config.adam);
  std::vector<std::size_t> order(data.samples);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(config.seed, "shuffle/epoch-" + std::to_string(epoch)));
    shuffle(std::span<std::size_t>(order), rng);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, order.size() - start);
      std::span<const std::size_t> batch(order.data() + start, len);
      Gradients g;
      try {
        g = backward(model, data, batch);
      } catch (const NumericError& e) {
        throw DivergenceError(std::string("epoch ") + std::to_string(epoch) + ": " + e.what(),
                              result.trace);
      }
      if (!std::isfinite(g.loss))
        throw DivergenceError("non-finite loss in epoch " + std::to_string(epoch), result.trace);
      loss_sum += g.loss * static_cast<double>(len);
      if (config.clip_norm > 0.0) clip_global_norm(g.grads, config.clip_norm);
      adam_step(adam, model.params, g.grads);
    }
    result.trace.epoch_loss.push_back(loss_sum / static_cast<double>(data.samples));
    result.trace.epoch_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
  }
  result.trace.snapshot_id = model_snapshot_id(model);
  return result;
}

void write_trace_csv(std::ostream& out, const TrainTrace& trace) {
  out << "epoch,mean_loss\n";
  for (std::size_t e = 0; e < trace.epoch_loss.size(); ++e)
    out << e + 1 << ',' << format_double(trace.epoch_loss[e]) << '\n';
}

}  // namespace hddrul
