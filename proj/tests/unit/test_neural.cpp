#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include <hddrul/error.hpp>
#include <hddrul/neural.hpp>
#include <hddrul/rng.hpp>

#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace hddrul;
using doctest::Approx;

namespace {

// Writes scalar weights into a 1-unit, 1-feature cell (gate order i, f, g, o).
void load_scalar(LstmCellParams& cell, const oracle::ScalarLstm& s) {
  cell.input_weights.col(0) << s.wi, s.wf, s.wg, s.wo;
  cell.hidden_weights.col(0) << s.ui, s.uf, s.ug, s.uo;
  cell.bias << s.bi, s.bf, s.bg, s.bo;
}

const oracle::ScalarLstm kForward{0.5, -0.3, 0.8, 0.1, 0.2, 0.4, -0.6, 0.7, 0.1, 1.0, -0.2, 0.3};
const oracle::ScalarLstm kBackward{-0.4, 0.6, 0.3, -0.9, 0.5, -0.1, 0.2, 0.3, -0.3, 0.5, 0.4, -0.1};

RowMatrix column(std::initializer_list<double> xs) {
  RowMatrix w(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) w(i++, 0) = x;
  return w;
}

WindowedDataset synthetic_windows(std::size_t drives, std::size_t timesteps, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.n_drives = drives;
  cfg.seed = seed;
  const std::vector<int> ids{7, 9, 240, 241, 242};
  std::vector<StandardizedSeries> z;
  for (const auto& s : cap_rul(generate_synthetic(cfg), 30)) z.push_back(standardize_per_device(s, ids));
  return window(z, timesteps);
}

}  // namespace

TEST_CASE("cell forward") {
  auto zero = LstmCellParams::zeros(3, 4);
  Eigen::VectorXd x(3);
  x << 1.5, -2.0, 7.0;
  auto step = lstm_cell_forward(zero, x, Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(4));
  CHECK(step.h.isZero(0.0));
  CHECK(step.c.isZero(0.0));

  Rng rng(3);
  LstmCellParams p = LstmCellParams::zeros(3, 4);
  for (Eigen::Index i = 0; i < p.input_weights.size(); ++i) p.input_weights.data()[i] = rng.uniform(-3, 3);
  for (Eigen::Index i = 0; i < p.hidden_weights.size(); ++i) p.hidden_weights.data()[i] = rng.uniform(-3, 3);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(4), c = Eigen::VectorXd::Zero(4);
  for (int t = 0; t < 50; ++t) {
    for (Eigen::Index i = 0; i < 3; ++i) x(i) = rng.normal() * 4;
    const double bound = c.cwiseAbs().maxCoeff() + 1.0;
    auto s = lstm_cell_forward(p, x, h, c);
    for (const auto* gate : {&s.cache.input, &s.cache.forget, &s.cache.output}) {
      // Closed bounds: large pre-activations saturate to exactly 0 or 1.
      CHECK((gate->array() >= 0.0).all());
      CHECK((gate->array() <= 1.0).all());
    }
    CHECK((s.cache.candidate.array().abs() <= 1.0).all());
    CHECK(s.c.cwiseAbs().maxCoeff() <= bound);
    h = s.h;
    c = s.c;
  }

  x(0) = std::nan("");
  CHECK_THROWS_AS(lstm_cell_forward(p, x, h, c), NumericError);
  CHECK_THROWS_AS(lstm_cell_forward(p, Eigen::VectorXd::Zero(2), h, c), ConfigError);
}

TEST_CASE("scalar hand traces") {
  auto cell = LstmCellParams::zeros(1, 1);
  load_scalar(cell, kForward);

  // One step written out by hand.
  const double x = 0.7;
  const double i = 1 / (1 + std::exp(-(0.5 * x + 0.1)));
  const double g = std::tanh(0.8 * x - 0.2);
  const double o = 1 / (1 + std::exp(-(0.1 * x + 0.3)));
  const double c = i * g;
  auto one = lstm_cell_forward(cell, Eigen::VectorXd::Constant(1, x), Eigen::VectorXd::Zero(1),
                               Eigen::VectorXd::Zero(1));
  CHECK(one.c(0) == Approx(c).epsilon(1e-14));
  CHECK(one.h(0) == Approx(o * std::tanh(c)).epsilon(1e-14));
  CHECK(lstm_forward(cell, column({x}))(0) == one.h(0));

  CHECK(lstm_forward(cell, column({0.7, -1.2}))(0) == Approx(kForward.run({0.7, -1.2})).epsilon(1e-14));

  auto model = make_model(Architecture::bidirectional, 1, 3, 1);
  load_scalar(model.params.forward, kForward);
  load_scalar(*model.params.backward, kBackward);
  model.params.dense.weights << 1.5, -0.75;
  model.params.dense.bias = 2.0;
  const double want = 1.5 * kForward.run({0.3, -0.5, 1.1}) - 0.75 * kBackward.run({1.1, -0.5, 0.3}) + 2.0;
  CHECK(bilstm_forward(model, column({0.3, -0.5, 1.1})) == Approx(want).epsilon(1e-14));
}

TEST_CASE("bidirectional model properties") {
  auto p = gradcheck::random_problem(4, Architecture::bidirectional, 3, 4, 2, 1);
  auto& model = p.model;

  SUBCASE("zero parameters predict the dense bias") {
    auto zero = make_model(Architecture::bidirectional, 2, 4, 3);
    zero.params.dense.bias = 17.25;
    CHECK(bilstm_forward(zero, p.windows[0]) == 17.25);
  }
  SUBCASE("palindromic window with tied directions gives equal halves") {
    *model.params.backward = model.params.forward;
    RowMatrix w(4, 2);
    w << 1, 2, 3, 4, 3, 4, 1, 2;
    const RowMatrix reversed = w.colwise().reverse();
    CHECK(lstm_forward(model.params.forward, w) == lstm_forward(*model.params.backward, reversed));
  }
  SUBCASE("zeroed backward half reproduces the vanilla model") {
    model.params.backward = LstmCellParams::zeros(2, 3);
    model.params.dense.weights.tail(3).setZero();
    auto vanilla = make_model(Architecture::vanilla, 2, 4, 3);
    vanilla.params.forward = model.params.forward;
    vanilla.params.dense.weights = model.params.dense.weights.head(3);
    vanilla.params.dense.bias = model.params.dense.bias;
    CHECK(bilstm_forward(model, p.windows[0]) == bilstm_forward(vanilla, p.windows[0]));
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(bilstm_forward(model, RowMatrix::Zero(3, 2)), ConfigError);
    CHECK_THROWS_AS(bilstm_forward(model, RowMatrix::Zero(4, 3)), ConfigError);
  }
  SUBCASE("forward pass is pure and batched prediction agrees") {
    auto data = synthetic_windows(2, 4, 1);
    auto m = make_model(Architecture::bidirectional, 5, 4, 6);
    initialize(m, 12);
    auto batched = predict(m, data);
    for (std::size_t s = 0; s < data.samples; s += 7) {
      const RowMatrix w = Eigen::Map<const RowMatrix>(data.window(s).data(), 4, 5);
      const double once = bilstm_forward(m, w);
      CHECK(bilstm_forward(m, w) == once);
      CHECK(batched[s] == Approx(once).epsilon(1e-12));
    }
  }
  SUBCASE("clip_predictions clamps") {
    model.clip_predictions = 0.0;
    CHECK(bilstm_forward(model, p.windows[0]) == 0.0);
  }
}

TEST_CASE("mse") {
  CHECK(mse_loss(std::vector<double>{1, 2}, std::vector<double>{1, 2}) == 0.0);
  CHECK(mse_loss(std::vector<double>{0}, std::vector<double>{3}) == 9.0);
  CHECK(mse_loss(std::vector<double>{1, 2}, std::vector<double>{2, 4}) == 2.5);
  CHECK_THROWS_AS(mse_loss(std::vector<double>{}, std::vector<double>{}), ConfigError);
}

TEST_CASE("analytic gradients match finite differences") {
  for (auto arch : {Architecture::vanilla, Architecture::bidirectional}) {
    auto p = gradcheck::random_problem(0, arch, 2, 3, 2, 3);
    auto r = gradcheck::check(p);
    INFO("worst entry " << r.worst);
    CHECK(r.max_relative_error <= 1e-5);
    CHECK(r.entries == (arch == Architecture::vanilla ? 8u * 2 + 8 * 2 + 8 + 2 + 1 : 2u * (16 + 16 + 8) + 4 + 1));
  }
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto p = gradcheck::random_problem(seed, Architecture::bidirectional, 3, 4, 3, 2);
    CHECK(gradcheck::check(p).max_relative_error <= 1e-4);
  }
}

TEST_CASE("gradient linearity in the residual") {
  auto p = gradcheck::random_problem(9, Architecture::bidirectional, 2, 3, 2, 1);
  const double pred = bilstm_forward(p.model, p.windows[0]);

  std::vector<double> exact{pred};
  auto zero = backward(p.model, p.windows, exact);
  CHECK(zero.loss == 0.0);
  for (auto& view : parameter_views(zero.grads))
    for (double v : view.values) CHECK(v == 0.0);

  const double r = 0.375;
  auto g1 = backward(p.model, p.windows, std::vector<double>{pred - r});
  auto g2 = backward(p.model, p.windows, std::vector<double>{pred - 2 * r});
  CHECK(g2.grads.dense.bias == Approx(2 * g1.grads.dense.bias).epsilon(1e-12));
  CHECK(g1.grads.dense.bias == Approx(2 * r).epsilon(1e-12));
}

TEST_CASE("adam") {
  SUBCASE("zero gradient leaves parameters alone") {
    auto p = gradcheck::random_problem(2, Architecture::vanilla, 2, 2, 2, 1).model.params;
    auto before = p;
    auto state = AdamState::for_params(p, {});
    adam_step(state, p, p.zeros_like());
    CHECK(p == before);
    CHECK(state.t == 1);
  }
  SUBCASE("first step moves each entry by about alpha against the gradient") {
    auto params = make_model(Architecture::vanilla, 1, 1, 1).params;
    auto grads = params.zeros_like();
    auto views = parameter_views(grads);
    Rng rng(1);
    for (auto& v : views)
      for (double& g : v.values) g = rng.uniform(-2, 2);
    auto state = AdamState::for_params(params, {});
    auto before = params;
    adam_step(state, params, grads);
    auto pv = parameter_views(params), bv = parameter_views(before);
    for (std::size_t k = 0; k < pv.size(); ++k)
      for (std::size_t i = 0; i < pv[k].values.size(); ++i) {
        const double g = views[k].values[i];
        const double step = pv[k].values[i] - bv[k].values[i];
        CHECK(step == Approx(-0.001 * g / (std::fabs(g) + 1e-8)).epsilon(1e-12));
      }
  }
  SUBCASE("three unit-gradient steps") {
    auto params = make_model(Architecture::vanilla, 1, 1, 1).params;
    params.dense.bias = 0.5;
    auto grads = params.zeros_like();
    grads.dense.bias = 1.0;
    auto state = AdamState::for_params(params, {});
    const double m[] = {0.1, 0.19, 0.271};
    const double v[] = {0.001, 0.001999, 0.002997001};
    double p = 0.5;
    for (int t = 0; t < 3; ++t) {
      adam_step(state, params, grads);
      CHECK(state.m.dense.bias == Approx(m[t]).epsilon(1e-14));
      CHECK(state.v.dense.bias == Approx(v[t]).epsilon(1e-14));
      const double m_hat = m[t] / (1 - std::pow(0.9, t + 1));
      const double v_hat = v[t] / (1 - std::pow(0.999, t + 1));
      p -= 0.001 * m_hat / (std::sqrt(v_hat) + 1e-8);
      CHECK(params.dense.bias == Approx(p).epsilon(1e-14));
    }
    CHECK(params.dense.bias == Approx(0.5 - 0.003 / (1 + 1e-8)).epsilon(1e-12));
  }
}

TEST_CASE("global norm clipping") {
  auto params = make_model(Architecture::vanilla, 1, 1, 1).params;
  auto g = params.zeros_like();
  g.dense.bias = 3.0;
  g.dense.weights(0) = 4.0;
  CHECK(clip_global_norm(g, 2.5) == Approx(5.0));
  CHECK(g.dense.bias == Approx(1.5));
  CHECK(g.dense.weights(0) == Approx(2.0));
  clip_global_norm(g, 0.0);
  CHECK(g.dense.bias == Approx(1.5));
}

TEST_CASE("training") {
  auto data = synthetic_windows(20, 5, 17);
  TrainConfig cfg;
  cfg.architecture = Architecture::bidirectional;
  cfg.hidden_size = 8;
  cfg.epochs = 6;
  cfg.seed = 5;

  auto a = train(cfg, data);
  auto b = train(cfg, data);
  CHECK(a.model == b.model);
  CHECK(a.trace.epoch_loss == b.trace.epoch_loss);
  CHECK(a.trace.snapshot_id == b.trace.snapshot_id);
  REQUIRE(a.trace.epoch_loss.size() == 6);
  CHECK(a.trace.epoch_seconds.size() == 6);
  CHECK(a.trace.epoch_loss.back() < a.trace.epoch_loss.front());
  CHECK(a.model.attributes == std::vector<int>{7, 9, 240, 241, 242});

  cfg.seed = 6;
  CHECK(train(cfg, data).trace.epoch_loss != a.trace.epoch_loss);

  cfg.epochs = 0;
  auto init = train(cfg, data);
  CHECK(init.trace.epoch_loss.empty());
  auto expected = make_model(Architecture::bidirectional, 5, 5, 8);
  initialize(expected, derive_seed(6, "init"));
  CHECK(init.model.params == expected.params);

  SUBCASE("divergence carries the trace so far") {
    auto bad = data;
    bad.targets[3] = std::numeric_limits<double>::infinity();
    cfg.epochs = 2;
    try {
      train(cfg, bad);
      FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
      CHECK(e.trace().epoch_loss.empty());
    }
  }
  CHECK_THROWS_AS(train(cfg, WindowedDataset{}), DataError);
}

TEST_CASE("initialization ranges") {
  auto m = make_model(Architecture::bidirectional, 5, 3, 32);
  initialize(m, 1);
  const double in_limit = std::sqrt(6.0 / (5 + 128)), hid_limit = std::sqrt(6.0 / (32 + 128));
  CHECK(m.params.forward.input_weights.cwiseAbs().maxCoeff() <= in_limit);
  CHECK(m.params.forward.hidden_weights.cwiseAbs().maxCoeff() <= hid_limit);
  CHECK(m.params.forward.bias.segment(32, 32).isOnes(0.0));
  CHECK(m.params.forward.bias.head(32).isZero(0.0));
  CHECK(m.params.forward.bias.tail(64).isZero(0.0));
  CHECK(m.params.dense.weights.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 65));
  CHECK(m.params.dense.bias == 0.0);
}

TEST_CASE("model files reproduce predictions bit for bit") {
  auto data = synthetic_windows(2, 3, 2);
  for (auto arch : {Architecture::vanilla, Architecture::bidirectional}) {
    auto m = make_model(arch, 5, 3, 4);
    initialize(m, 77);
    m.attributes = {7, 9, 240, 241, 242};
    std::stringstream buf;
    save_model(buf, m);
    auto loaded = load_model(buf);
    CHECK(loaded == m);
    CHECK(loaded.params == m.params);
    CHECK(predict(loaded, data) == predict(m, data));
    CHECK(model_snapshot_id(loaded) == model_snapshot_id(m));
  }
  std::istringstream truncated("hddrul-model 1\narchitecture lstm\nfeatures 2\n");
  CHECK_THROWS_AS(load_model(truncated), DataError);
  std::istringstream wrong("not-a-model 1\n");
  CHECK_THROWS_AS(load_model(wrong), DataError);
}
