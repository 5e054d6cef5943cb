// Parallel kernels against their serial reference twins, plus the per-step
// costs that dominate a closed-loop forecast.
#include <benchmark/benchmark.h>

#include <random>

#include "fnarx/basis.hpp"
#include "fnarx/experiments.hpp"
#include "fnarx/features.hpp"
#include "fnarx/model.hpp"
#include "fnarx/parallel.hpp"
#include "fnarx/simulate.hpp"

using namespace fnarx;

namespace {

RowMatrix random_rows(Eigen::Index rows, Eigen::Index cols) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  RowMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

const CaseStudy& study() {
  static const CaseStudy s = [] {
    BuildingStudyParams p;
    p.n_train = 8;
    p.n_validation = 16;
    p.duration = 30.0;
    return building_study(p);
  }();
  return s;
}

const FittedModel& model() {
  static const FittedModel m = [] {
    ModelConfig c;
    c.memory_s = 2.0;
    c.basis = {2, 2, 1.0};
    c.max_iters = 40;
    return fit(study().train, c);
  }();
  return m;
}

struct Features {
  InformationMatrix info;
  std::vector<ChannelTransform> transforms;
};

const Features& features() {
  static const Features f = [] {
    Features out;
    const auto& train = study().train;
    out.info = stack_design(train, MemoryConfig::uniform(2.0, train.dt(), train[0].n_exogenous()));
    out.transforms.resize(out.info.blocks.size());
    for (std::size_t j = 0; j < out.transforms.size(); ++j) {
      out.transforms[j].pca = fit_pca(out.info.blocks[j], Truncation{0.99, 0});
    }
    return out;
  }();
  return f;
}

void threads(benchmark::State& state) { set_num_threads(int(state.range(0))); }

}  // namespace

static void BM_Regressors(benchmark::State& state) {
  threads(state);
  const auto set = generate_multi_indices(12, 3, 2, 1.0);
  const auto f = random_rows(20000, 12);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_regressors(set, f));
}
static void BM_RegressorsSerial(benchmark::State& state) {
  const auto set = generate_multi_indices(12, 3, 2, 1.0);
  const auto f = random_rows(20000, 12);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_regressors_serial(set, f));
}

static void BM_Features(benchmark::State& state) {
  threads(state);
  const auto& f = features();
  for (auto _ : state) benchmark::DoNotOptimize(compute_features(f.transforms, f.info));
}
static void BM_FeaturesSerial(benchmark::State& state) {
  const auto& f = features();
  for (auto _ : state) benchmark::DoNotOptimize(compute_features_serial(f.transforms, f.info));
}

static void BM_Forecast(benchmark::State& state) {
  threads(state);
  const auto& m = model();
  for (auto _ : state) benchmark::DoNotOptimize(forecast_design(m, study().validation));
}
static void BM_ForecastSerial(benchmark::State& state) {
  const auto& m = model();
  for (auto _ : state) benchmark::DoNotOptimize(forecast_design_serial(m, study().validation));
}

static void BM_Simulate(benchmark::State& state) {
  threads(state);
  const SamplingGrid g{0.025, 2401, 0.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_building_design({}, {}, g, 16, 1));
  }
}
static void BM_SimulateSerial(benchmark::State& state) {
  const SamplingGrid g{0.025, 2401, 0.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_building_design_serial({}, {}, g, 16, 1));
  }
}

static void BM_ApplySingle(benchmark::State& state) {
  const auto& t = features().transforms[0].pca;
  std::vector<double> w(t.means.size(), 0.3), out(t.retained());
  for (auto _ : state) {
    apply_single(t, w, out);
    benchmark::DoNotOptimize(out.data());
  }
}

static void BM_EvaluateSingle(benchmark::State& state) {
  const auto set = generate_multi_indices(12, 3, 2, 1.0);
  std::vector<double> xi(12, 0.7);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_single(set, xi));
}

BENCHMARK(BM_Regressors)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RegressorsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Features)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FeaturesSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Forecast)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForecastSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Simulate)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ApplySingle);
BENCHMARK(BM_EvaluateSingle);

BENCHMARK_MAIN();
