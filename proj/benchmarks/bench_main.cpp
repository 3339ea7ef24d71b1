#include <benchmark/benchmark.h>

#include <numeric>

#include <hddrul/hddrul.hpp>

using namespace hddrul;

namespace {

WindowedDataset windows(std::size_t timesteps) {
  SynthConfig synth;
  synth.n_drives = 30;
  synth.seed = 1;
  const auto cohort = cap_rul(generate_synthetic(synth), 30);
  const auto ids = synthetic_attributes(synth.n_features);
  std::vector<StandardizedSeries> scaled;
  for (const auto& s : cohort) scaled.push_back(standardize_per_device(s, ids));
  return window(scaled, timesteps);
}

BiLstmModel model_for(Architecture arch, const WindowedDataset& data) {
  auto m = make_model(arch, data.features, data.timesteps, 32);
  initialize(m, 7);
  return m;
}

Architecture arch_of(const benchmark::State& state) {
  return state.range(1) ? Architecture::bidirectional : Architecture::vanilla;
}

void BM_Predict(benchmark::State& state) {
  const auto data = windows(static_cast<std::size_t>(state.range(0)));
  const auto model = model_for(arch_of(state), data);
  for (auto _ : state) benchmark::DoNotOptimize(predict(model, data));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.samples));
}

void BM_Backward(benchmark::State& state) {
  const auto data = windows(static_cast<std::size_t>(state.range(0)));
  const auto model = model_for(arch_of(state), data);
  std::vector<std::size_t> batch(64);
  std::iota(batch.begin(), batch.end(), std::size_t{0});
  for (auto _ : state) benchmark::DoNotOptimize(backward(model, data, batch));
  state.SetItemsProcessed(state.iterations() * 64);
}

void BM_TreeFit(benchmark::State& state) {
  Rng rng(3);
  const auto n = state.range(0);
  RowMatrix x(n, 5);
  std::vector<double> y(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  for (auto& v : y) v = static_cast<double>(rng.below(31));
  for (auto _ : state) benchmark::DoNotOptimize(fit_tree(x, y));
}

}  // namespace

BENCHMARK(BM_Predict)->ArgsProduct({{5, 15, 30}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Backward)->ArgsProduct({{5, 15, 30}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_TreeFit)->Arg(500)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
