#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include <hddrul/error.hpp>
#include <hddrul/eval.hpp>
#include <hddrul/rng.hpp>

#include "oracles.hpp"

using namespace hddrul;
using doctest::Approx;

namespace {

WindowedDataset toy(std::vector<double> targets, std::size_t timesteps = 1, std::size_t features = 1) {
  WindowedDataset d;
  d.samples = targets.size();
  d.timesteps = timesteps;
  d.features = features;
  d.values.assign(d.samples * timesteps * features, 0.5);
  d.targets = std::move(targets);
  for (std::size_t s = 0; s < d.samples; ++s) d.provenance.push_back({"S" + std::to_string(s), Day{}});
  return d;
}

Predictor constant(double value, std::size_t timesteps = 1) {
  return {"const", timesteps, timesteps, 1,
          [value](const WindowedDataset& d) { return std::vector<double>(d.samples, value); }};
}

Predictor oracle_predictor() {
  return {"oracle", std::nullopt, 1, 1, [](const WindowedDataset& d) { return d.targets; }};
}

}  // namespace

TEST_CASE("rounded accuracy") {
  CHECK(accuracy_rounded(std::vector<double>{24.4}, std::vector<double>{24}) == 1.0);
  CHECK(accuracy_rounded(std::vector<double>{24.6}, std::vector<double>{24}) == 0.0);
  CHECK(accuracy_rounded(std::vector<double>{24.5}, std::vector<double>{25}) == 1.0);
  CHECK(accuracy_rounded(std::vector<double>{-0.5}, std::vector<double>{-1}) == 1.0);
  CHECK(accuracy_rounded(std::vector<double>{30.2, 1.0}, std::vector<double>{30, 2}) == 0.5);
  CHECK_THROWS_AS(accuracy_rounded(std::vector<double>{}, std::vector<double>{}), ConfigError);
}

TEST_CASE("mae") {
  CHECK(mae(std::vector<double>{1, 2}, std::vector<double>{1, 2}) == 0.0);
  CHECK(mae(std::vector<double>{1, 3}, std::vector<double>{2, 2}) == 1.0);
  Rng rng(100);
  std::vector<double> p(100), a(100);
  for (int i = 0; i < 100; ++i) {
    p[i] = rng.uniform(-50, 50);
    a[i] = rng.uniform(0, 30);
  }
  CHECK(mae(p, a) == Approx(oracle::kahan_mae(p, a)).epsilon(1e-13));
}

TEST_CASE("r2") {
  const std::vector<double> a{1, 2, 3, 4};
  CHECK(*r2(a, a) == 1.0);
  CHECK(std::fabs(*r2(std::vector<double>(4, 2.5), a)) <= 1e-9);
  CHECK(*r2(std::vector<double>{4, 3, 2, 1}, a) < 0.0);
  CHECK_FALSE(r2(a, std::vector<double>{3, 3, 3, 3}).has_value());
}

TEST_CASE("metrics are permutation invariant and bounded") {
  Rng rng(8);
  std::vector<double> p(60), a(60);
  for (int i = 0; i < 60; ++i) {
    a[i] = static_cast<double>(rng.below(31));
    p[i] = a[i] + rng.normal() * 3;
  }
  const double acc = accuracy_rounded(p, a), m = mae(p, a), r = *r2(p, a);
  std::vector<std::size_t> order(60);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(std::span<std::size_t>(order), rng);
  std::vector<double> ps, as;
  for (auto i : order) {
    ps.push_back(p[i]);
    as.push_back(a[i]);
  }
  CHECK(accuracy_rounded(ps, as) == acc);
  CHECK(mae(ps, as) == Approx(m).epsilon(1e-14));
  CHECK(*r2(ps, as) == Approx(r).epsilon(1e-12));
  CHECK(acc >= 0.0);
  CHECK(acc <= 1.0);
  CHECK(m >= 0.0);
  CHECK(r <= 1.0);
}

TEST_CASE("noise on exact predictions only costs accuracy") {
  Rng rng(42);
  std::vector<double> a(200);
  for (auto& v : a) v = static_cast<double>(rng.below(31));
  CHECK(accuracy_rounded(a, a) == 1.0);
  double noisy = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    auto q = a;
    for (auto& v : q) v += rng.uniform(-1.0, 1.0);
    const double acc = accuracy_rounded(q, a);
    CHECK(acc < 1.0);
    noisy += acc;
  }
  // Half the mass of U(-1, 1) rounds back to the truth.
  CHECK(noisy / 30.0 == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("evaluate") {
  auto data = toy({5, 1, 3, 3, 0});
  auto perfect = evaluate(oracle_predictor(), data, "c");
  CHECK(perfect.accuracy == 1.0);
  CHECK(*perfect.r2 == 1.0);
  CHECK(perfect.mae == 0.0);
  CHECK(perfect.cohort_id == "c");
  CHECK(std::is_sorted(perfect.samples.begin(), perfect.samples.end(),
                       [](const auto& x, const auto& y) { return x.actual < y.actual; }));

  auto mean = evaluate(constant(2.4), data, "c");
  CHECK(std::fabs(*mean.r2) <= 1e-9);
  CHECK(mean.timesteps == 1);

  CHECK_THROWS_AS(evaluate(constant(1.0, 3), data, "c"), ConfigError);
  CHECK_THROWS_AS(evaluate(constant(1.0), toy({}), "c"), DataError);
}

TEST_CASE("report CSV dump reproduces the header metrics") {
  Rng rng(3);
  std::vector<double> targets(80);
  for (auto& t : targets) t = static_cast<double>(rng.below(31));
  auto data = toy(targets);
  Predictor noisy{"noisy", 15, 1, 1, [&](const WindowedDataset& d) {
                    std::vector<double> out;
                    Rng local(9);
                    for (double t : d.targets) out.push_back(t + local.normal() * 2);
                    return out;
                  }};
  auto report = evaluate(noisy, data, "test");
  std::stringstream buf;
  write_report_csv(buf, report);
  auto back = read_report_csv(buf);
  CHECK(back.model_id == report.model_id);
  CHECK(back.timesteps == report.timesteps);
  CHECK(back.accuracy == report.accuracy);
  CHECK(back.mae == report.mae);
  CHECK(back.r2 == report.r2);
  std::vector<double> p, a;
  for (const auto& s : back.samples) {
    p.push_back(s.predicted);
    a.push_back(s.actual);
  }
  CHECK(std::fabs(accuracy_rounded(p, a) - back.accuracy) <= 1e-12);
  CHECK(std::fabs(mae(p, a) - back.mae) <= 1e-12);
  CHECK(std::fabs(*r2(p, a) - *back.r2) <= 1e-12);

  std::ostringstream again;
  write_report_csv(again, evaluate(noisy, data, "test"));
  std::ostringstream first;
  write_report_csv(first, report);
  CHECK(again.str() == first.str());
}

TEST_CASE("run_matrix") {
  std::vector<MatrixEntry> entries;
  for (const char* label : {"LSTM", "Bi-LSTM"})
    for (std::size_t ts : {5, 10, 15, 30}) entries.push_back({label, ts, constant(2.0, ts)});
  entries.push_back({"RF", std::nullopt, constant(3.0, 1)});
  std::vector<MatrixCohort> cohorts;
  for (const char* id : {"test", "extrapolate"})
    cohorts.push_back({id, [](const Predictor& p) { return toy({1, 2, 3, 30}, p.window_timesteps); }});

  auto full = run_matrix(entries, cohorts);
  CHECK(full.reports.size() == 18);
  CHECK(full.warnings.empty());
  CHECK(full.reports[0].model_id == "LSTM");
  CHECK(full.reports[8].model_id == "RF");
  CHECK_FALSE(full.reports[8].timesteps.has_value());
  CHECK(full.reports[9].cohort_id == "extrapolate");

  entries[2].predictor.reset();
  auto partial = run_matrix(entries, cohorts);
  CHECK(partial.reports.size() == 16);
  CHECK(partial.warnings.size() == 1);

  std::ostringstream summary;
  write_summary_csv(summary, std::span<const EvalReport>(full.reports.data(), 9));
  const auto text = summary.str();
  CHECK(text.rfind("Model,Timesteps,Accuracy,R2,MAE\nLSTM,5,", 0) == 0);
  CHECK(text.find("\nRF,NA,") != std::string::npos);
}
