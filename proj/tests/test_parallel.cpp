#include <gtest/gtest.h>

#include "fnarx/basis.hpp"
#include "fnarx/experiments.hpp"
#include "fnarx/features.hpp"
#include "fnarx/model.hpp"
#include "fnarx/parallel.hpp"
#include "fnarx/simulate.hpp"
#include "helpers.hpp"

using namespace fnarx;

namespace {

void expect_same_design(const ExperimentalDesign& a, const ExperimentalDesign& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].n_exogenous(), b[i].n_exogenous());
    for (std::size_t j = 0; j < a[i].n_exogenous(); ++j) {
      EXPECT_EQ(a[i].exogenous(j).values, b[i].exogenous(j).values);
    }
    EXPECT_EQ(a[i].output().values, b[i].output().values);
  }
}

class Parallel : public ::testing::Test {
 protected:
  void SetUp() override { set_num_threads(4); }
  void TearDown() override { set_num_threads(0); }
};

}  // namespace

TEST_F(Parallel, RegressorsMatchSerial) {
  const auto s = generate_multi_indices(5, 3, 3, 0.8);
  const RowMatrix f = test::random_matrix(777, 5, 3);
  EXPECT_EQ(evaluate_regressors(s, f), evaluate_regressors_serial(s, f));
}

TEST_F(Parallel, FeaturesMatchSerial) {
  const auto design = test::first_order_design(4, 500, 7);
  const auto info = stack_design(design, MemoryConfig::uniform(8.0, 1.0, 1));
  std::vector<ChannelTransform> ts(2);
  ts[0].pca = fit_pca(info.blocks[0], Truncation{0.95, 0});
  ts[1].pca = fit_pca(info.blocks[1], Truncation{0.95, 0});
  const auto a = compute_features(ts, info);
  const auto b = compute_features_serial(ts, info);
  EXPECT_EQ(a.widths, b.widths);
  EXPECT_EQ(a.values, b.values);
}

TEST_F(Parallel, SimulationMatchesSerial) {
  ShearBuildingParams building;
  ExcitationParams excitation;
  const SamplingGrid grid{0.025, 400, 0.0};
  expect_same_design(simulate_building_design(building, excitation, grid, 6, 11),
                     simulate_building_design_serial(building, excitation, grid, 6, 11));
  OscillatorParams osc;
  osc.cubic_stiffness = 50.0;
  osc.damping = 0.5;
  const SamplingGrid g2{0.02, 300, 0.0};
  expect_same_design(simulate_oscillator_design(osc, excitation, g2, 5, 3),
                     simulate_oscillator_design_serial(osc, excitation, g2, 5, 3));
}

TEST_F(Parallel, ForecastsMatchSerialAndThreadCount) {
  BuildingStudyParams p;
  p.n_train = 4;
  p.n_validation = 6;
  p.duration = 10.0;
  const auto study = building_study(p);
  ModelConfig cfg;
  cfg.max_iters = 15;
  const auto m = fit(study.train, cfg);
  const auto a = forecast_design(m, study.validation);
  const auto b = forecast_design_serial(m, study.validation);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].prediction, b[i].prediction);
    EXPECT_EQ(a[i].nmse, b[i].nmse);
  }
  set_num_threads(1);
  const auto single = fit(study.train, cfg);
  EXPECT_EQ(single.coefficients.values, m.coefficients.values);
}
