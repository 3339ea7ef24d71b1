#include <algorithm>
#include <cmath>
#include <utility>

#include "hddrul/error.hpp"
#include "hddrul/neural.hpp"
#include "param_visit.hpp"

namespace hddrul {
namespace {

Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& a) { return 1.0 / (1.0 + (-a).exp()); }

// Per-direction activations of a batch, one entry per timestep. Columns
// are samples.
struct DirectionTrace {
  std::vector<Eigen::MatrixXd> x, h_prev, c_prev, gates, c, tanh_c;
  Eigen::MatrixXd h_last;
};

Eigen::MatrixXd batch_step_input(const WindowedDataset& data, std::span<const std::size_t> batch,
                                 std::size_t step) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(data.features),
                    static_cast<Eigen::Index>(batch.size()));
  for (std::size_t b = 0; b < batch.size(); ++b)
    for (std::size_t f = 0; f < data.features; ++f)
      x(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(b)) = data.at(batch[b], step, f);
  return x;
}

DirectionTrace run_direction(const LstmCellParams& p, const WindowedDataset& data,
                             std::span<const std::size_t> batch, bool reversed, bool keep) {
  const auto hidden = static_cast<Eigen::Index>(p.hidden_size());
  const auto cols = static_cast<Eigen::Index>(batch.size());
  DirectionTrace tr;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(hidden, cols);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(hidden, cols);
  for (std::size_t t = 0; t < data.timesteps; ++t) {
    const std::size_t step = reversed ? data.timesteps - 1 - t : t;
    Eigen::MatrixXd x = batch_step_input(data, batch, step);
    Eigen::MatrixXd pre = p.input_weights * x + p.hidden_weights * h;
    pre.colwise() += p.bias;
    Eigen::MatrixXd gates(pre.rows(), pre.cols());
    gates.topRows(hidden) = sigmoid(pre.topRows(hidden).array()).matrix();
    gates.middleRows(hidden, hidden) = sigmoid(pre.middleRows(hidden, hidden).array()).matrix();
    gates.middleRows(2 * hidden, hidden) = pre.middleRows(2 * hidden, hidden).array().tanh().matrix();
    gates.bottomRows(hidden) = sigmoid(pre.bottomRows(hidden).array()).matrix();

    Eigen::MatrixXd c_next = (gates.middleRows(hidden, hidden).array() * c.array() +
                              gates.topRows(hidden).array() *
                                  gates.middleRows(2 * hidden, hidden).array())
                                 .matrix();
    Eigen::MatrixXd tanh_c = c_next.array().tanh().matrix();
    Eigen::MatrixXd h_next = (gates.bottomRows(hidden).array() * tanh_c.array()).matrix();
    if (keep) {
      tr.x.push_back(std::move(x));
      tr.h_prev.push_back(h);
      tr.c_prev.push_back(c);
      tr.gates.push_back(std::move(gates));
      tr.c.push_back(c_next);
      tr.tanh_c.push_back(std::move(tanh_c));
    }
    h = std::move(h_next);
    c = std::move(c_next);
  }
  tr.h_last = std::move(h);
  return tr;
}

void backprop_direction(const LstmCellParams& p, const DirectionTrace& tr, Eigen::MatrixXd dh,
                        LstmCellParams& g) {
  const auto hidden = static_cast<Eigen::Index>(p.hidden_size());
  Eigen::ArrayXXd dc = Eigen::ArrayXXd::Zero(dh.rows(), dh.cols());
  for (std::size_t k = tr.gates.size(); k-- > 0;) {
    const auto& gates = tr.gates[k];
    const Eigen::ArrayXXd i = gates.topRows(hidden).array();
    const Eigen::ArrayXXd f = gates.middleRows(hidden, hidden).array();
    const Eigen::ArrayXXd cand = gates.middleRows(2 * hidden, hidden).array();
    const Eigen::ArrayXXd o = gates.bottomRows(hidden).array();
    const Eigen::ArrayXXd tc = tr.tanh_c[k].array();
    const Eigen::ArrayXXd dh_a = dh.array();

    dc += dh_a * o * (1.0 - tc * tc);
    Eigen::MatrixXd da(4 * hidden, dh.cols());
    da.topRows(hidden) = (dc * cand * i * (1.0 - i)).matrix();
    da.middleRows(hidden, hidden) = (dc * tr.c_prev[k].array() * f * (1.0 - f)).matrix();
    da.middleRows(2 * hidden, hidden) = (dc * i * (1.0 - cand * cand)).matrix();
    da.bottomRows(hidden) = (dh_a * tc * o * (1.0 - o)).matrix();

    g.input_weights.noalias() += da * tr.x[k].transpose();
    g.hidden_weights.noalias() += da * tr.h_prev[k].transpose();
    g.bias += da.rowwise().sum();
    dh.noalias() = p.hidden_weights.transpose() * da;
    dc *= f;
  }
}

void check_shape(const BiLstmModel& model, std::size_t timesteps, std::size_t features) {
  if (features != model.features || timesteps != model.timesteps)
    throw ConfigError("window is " + std::to_string(timesteps) + "x" + std::to_string(features) +
                      " but the model expects " + std::to_string(model.timesteps) + "x" +
                      std::to_string(model.features));
}

double finish_prediction(const BiLstmModel& model, double raw) {
  if (model.clip_predictions) return std::clamp(raw, 0.0, *model.clip_predictions);
  return raw;
}

}  // namespace

LstmCellParams LstmCellParams::zeros(std::size_t features, std::size_t hidden) {
  const auto h = static_cast<Eigen::Index>(hidden), f = static_cast<Eigen::Index>(features);
  return {Eigen::MatrixXd::Zero(4 * h, f), Eigen::MatrixXd::Zero(4 * h, h),
          Eigen::VectorXd::Zero(4 * h)};
}

bool LstmCellParams::operator==(const LstmCellParams& other) const {
  auto same = [](const auto& a, const auto& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
  };
  return same(input_weights, other.input_weights) && same(hidden_weights, other.hidden_weights) &&
         same(bias, other.bias);
}

bool DenseParams::operator==(const DenseParams& other) const {
  return weights.size() == other.weights.size() && weights == other.weights &&
         bias == other.bias;
}

Parameters Parameters::zeros_like() const {
  Parameters z;
  z.forward = LstmCellParams::zeros(forward.input_size(), forward.hidden_size());
  if (backward) z.backward = LstmCellParams::zeros(backward->input_size(), backward->hidden_size());
  z.dense.weights = Eigen::VectorXd::Zero(dense.weights.size());
  z.dense.bias = 0.0;
  return z;
}

std::vector<ParamView> parameter_views(Parameters& params) {
  std::vector<ParamView> views;
  detail::visit_tensors(params, [&](std::string_view name, std::span<double> values) {
    views.push_back({std::string(name), values});
  });
  return views;
}

CellStep lstm_cell_forward(const LstmCellParams& params, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& h_prev, const Eigen::VectorXd& c_prev) {
  const auto hidden = static_cast<Eigen::Index>(params.hidden_size());
  if (x.size() != static_cast<Eigen::Index>(params.input_size()) || h_prev.size() != hidden ||
      c_prev.size() != hidden)
    throw ConfigError("lstm_cell_forward: inconsistent shapes");
  if (!x.allFinite() || !h_prev.allFinite() || !c_prev.allFinite())
    throw NumericError("lstm_cell_forward: non-finite input");

  const Eigen::VectorXd pre = params.input_weights * x + params.hidden_weights * h_prev + params.bias;
  CellStep step;
  auto& cache = step.cache;
  cache.x = x;
  cache.h_prev = h_prev;
  cache.c_prev = c_prev;
  cache.input = sigmoid(pre.segment(0, hidden).array()).matrix();
  cache.forget = sigmoid(pre.segment(hidden, hidden).array()).matrix();
  cache.candidate = pre.segment(2 * hidden, hidden).array().tanh().matrix();
  cache.output = sigmoid(pre.segment(3 * hidden, hidden).array()).matrix();
  cache.c = (cache.forget.array() * c_prev.array() + cache.input.array() * cache.candidate.array())
                .matrix();
  cache.tanh_c = cache.c.array().tanh().matrix();
  step.c = cache.c;
  step.h = (cache.output.array() * cache.tanh_c.array()).matrix();
  return step;
}

Eigen::VectorXd lstm_forward(const LstmCellParams& params, const RowMatrix& window) {
  if (window.rows() < 1) throw ConfigError("lstm_forward needs at least one timestep");
  const auto hidden = static_cast<Eigen::Index>(params.hidden_size());
  Eigen::VectorXd h = Eigen::VectorXd::Zero(hidden), c = Eigen::VectorXd::Zero(hidden);
  for (Eigen::Index t = 0; t < window.rows(); ++t) {
    auto step = lstm_cell_forward(params, window.row(t).transpose(), h, c);
    h = std::move(step.h);
    c = std::move(step.c);
  }
  return h;
}

std::string_view architecture_name(Architecture arch) {
  return arch == Architecture::vanilla ? "lstm" : "bilstm";
}

Architecture parse_architecture(std::string_view name) {
  if (name == "lstm" || name == "vanilla") return Architecture::vanilla;
  if (name == "bilstm" || name == "bidirectional") return Architecture::bidirectional;
  throw ConfigError("unknown architecture '" + std::string(name) + "'");
}

double bilstm_forward(const BiLstmModel& model, const RowMatrix& window) {
  check_shape(model, static_cast<std::size_t>(window.rows()), static_cast<std::size_t>(window.cols()));
  const auto& p = model.params;
  const auto hidden = static_cast<Eigen::Index>(p.forward.hidden_size());
  double out = p.dense.weights.head(hidden).dot(lstm_forward(p.forward, window));
  if (model.architecture == Architecture::bidirectional) {
    RowMatrix reversed = window.colwise().reverse();
    out += p.dense.weights.tail(hidden).dot(lstm_forward(*p.backward, reversed));
  }
  return finish_prediction(model, out + p.dense.bias);
}

std::vector<double> predict(const BiLstmModel& model, const WindowedDataset& data) {
  if (data.samples == 0) return {};
  check_shape(model, data.timesteps, data.features);
  const auto hidden = static_cast<Eigen::Index>(model.params.forward.hidden_size());
  constexpr std::size_t chunk = 256;
  std::vector<double> out(data.samples);
  std::vector<std::size_t> batch;
  for (std::size_t start = 0; start < data.samples; start += chunk) {
    batch.clear();
    for (std::size_t s = start; s < std::min(data.samples, start + chunk); ++s) batch.push_back(s);
    Eigen::RowVectorXd pred =
        model.params.dense.weights.head(hidden).transpose() *
        run_direction(model.params.forward, data, batch, false, false).h_last;
    if (model.architecture == Architecture::bidirectional)
      pred += model.params.dense.weights.tail(hidden).transpose() *
              run_direction(*model.params.backward, data, batch, true, false).h_last;
    for (std::size_t b = 0; b < batch.size(); ++b)
      out[batch[b]] = finish_prediction(model, pred(static_cast<Eigen::Index>(b)) + model.params.dense.bias);
  }
  return out;
}

double mse_loss(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size() || predictions.empty())
    throw ConfigError("mse_loss needs equal, non-empty inputs");
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    sum += (predictions[i] - targets[i]) * (predictions[i] - targets[i]);
  return sum / static_cast<double>(predictions.size());
}

Gradients backward(const BiLstmModel& model, const WindowedDataset& data,
                   std::span<const std::size_t> batch) {
  if (batch.empty()) throw ConfigError("backward needs a non-empty batch");
  check_shape(model, data.timesteps, data.features);
  const auto& p = model.params;
  const auto hidden = static_cast<Eigen::Index>(p.forward.hidden_size());
  const bool bidir = model.architecture == Architecture::bidirectional;

  DirectionTrace fwd = run_direction(p.forward, data, batch, false, true);
  DirectionTrace bwd;
  Eigen::RowVectorXd pred = p.dense.weights.head(hidden).transpose() * fwd.h_last;
  if (bidir) {
    bwd = run_direction(*p.backward, data, batch, true, true);
    pred += p.dense.weights.tail(hidden).transpose() * bwd.h_last;
  }
  pred.array() += p.dense.bias;

  const double n = static_cast<double>(batch.size());
  Eigen::RowVectorXd residual(pred.size());
  for (std::size_t b = 0; b < batch.size(); ++b)
    residual(static_cast<Eigen::Index>(b)) = pred(static_cast<Eigen::Index>(b)) - data.targets[batch[b]];

  Gradients result;
  result.loss = residual.squaredNorm() / n;
  result.grads = p.zeros_like();
  const Eigen::RowVectorXd dpred = 2.0 * residual / n;

  auto& g = result.grads;
  g.dense.bias = dpred.sum();
  g.dense.weights.head(hidden) = fwd.h_last * dpred.transpose();
  backprop_direction(p.forward, fwd, p.dense.weights.head(hidden) * dpred, g.forward);
  if (bidir) {
    g.dense.weights.tail(hidden) = bwd.h_last * dpred.transpose();
    backprop_direction(*p.backward, bwd, p.dense.weights.tail(hidden) * dpred, *g.backward);
  }

  detail::visit_tensors(std::as_const(g), [](std::string_view name, std::span<const double> v) {
    for (double x : v)
      if (!std::isfinite(x)) throw NumericError("non-finite gradient in " + std::string(name));
  });
  return result;
}

Gradients backward(const BiLstmModel& model, std::span<const RowMatrix> windows,
                   std::span<const double> targets) {
  if (windows.size() != targets.size()) throw ConfigError("windows and targets differ in count");
  if (windows.empty()) throw ConfigError("backward needs a non-empty batch");
  WindowedDataset data;
  data.samples = windows.size();
  data.timesteps = static_cast<std::size_t>(windows.front().rows());
  data.features = static_cast<std::size_t>(windows.front().cols());
  for (const auto& w : windows) {
    if (static_cast<std::size_t>(w.rows()) != data.timesteps ||
        static_cast<std::size_t>(w.cols()) != data.features)
      throw ConfigError("windows in a batch must share one shape");
    data.values.insert(data.values.end(), w.data(), w.data() + w.size());
  }
  data.targets.assign(targets.begin(), targets.end());
  std::vector<std::size_t> batch(windows.size());
  for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = i;
  return backward(model, data, batch);
}

}  // namespace hddrul
