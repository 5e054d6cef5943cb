#include <gtest/gtest.h>

#include <filesystem>
#include <functional>
#include <string>

#include "fnarx/error.hpp"
#include "fnarx/experiments.hpp"
#include "fnarx/model_io.hpp"
#include "fnarx/study_io.hpp"
#include "helpers.hpp"

using namespace fnarx;
using nlohmann::json;

namespace {

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(ModelIo, RoundTripGivesIdenticalForecasts) {
  BuildingStudyParams p;
  p.n_train = 4;
  p.n_validation = 5;
  p.duration = 12.0;
  const auto study = building_study(p);
  ModelConfig cfg;
  cfg.basis.degree = 2;
  cfg.basis.interaction = 2;
  cfg.basis.q = 0.85;
  cfg.max_iters = 25;
  const auto m = fit(study.train, cfg);

  const auto path = std::filesystem::temp_directory_path() / "fnarx_model_io.json";
  save_model(m, path);
  const auto back = load_model(path);
  EXPECT_EQ(back.basis, m.basis);
  EXPECT_EQ(back.coefficients.values, m.coefficients.values);
  EXPECT_EQ(back.coefficients.active, m.coefficients.active);
  EXPECT_EQ(back.gamma, m.gamma);
  EXPECT_EQ(to_json(back), to_json(m));
  for (const auto& t : study.validation) {
    EXPECT_EQ(forecast(back, t).prediction, forecast(m, t).prediction);
  }
}

TEST(ModelIo, ClassicalModelRoundTrip) {
  const auto m = fit(test::first_order_design(2, 200, 5),
                     ModelConfig::classical(LagSpec::full(1, 2, 2)));
  const auto back = model_from_json(json::parse(to_json(m).dump()));
  const auto t = test::first_order_system(300, 77);
  EXPECT_EQ(forecast(back, t).prediction, forecast(m, t).prediction);
}

TEST(ModelIo, RejectsWrongSchemaAndIgnoresExtras) {
  const auto m = fit(test::first_order_design(1, 100, 1),
                     ModelConfig::classical(LagSpec::full(1, 1, 1)));
  auto j = to_json(m);
  j["extra_field"] = 1;
  EXPECT_NO_THROW(model_from_json(j));
  j["schema"] = "something/else";
  EXPECT_THROW(model_from_json(j), Error);
  EXPECT_THROW(load_model("/nonexistent/model.json"), Error);
}

TEST(ConfigIo, StrictRejectsUnknownKeysWithLocation) {
  const auto msg = message_of([] {
    model_config_from_json(json{{"basis", {{"degree", 2}, {"degre", 3}}}}, true, "model");
  });
  EXPECT_NE(msg.find("model.basis.degre"), std::string::npos) << msg;
  EXPECT_NO_THROW(model_config_from_json(json{{"bogus", 1}}, false));
  EXPECT_THROW(model_config_from_json(json{{"k_eval", "ten"}}, true), Error);
  EXPECT_THROW(model_config_from_json(json{{"k_eval", 0}}, true), Error);
}

TEST(ConfigIo, ModelConfigRoundTrip) {
  ModelConfig c;
  c.memory_s = 2.5;
  c.exogenous.truncation.nu = 0.9;
  c.basis = {3, 2, 0.7};
  c.max_rows = 1000;
  c.gamma = 1e-6;
  c.init = ForecastInit::kTruth;
  const auto back = model_config_from_json(to_json(c), true);
  EXPECT_EQ(to_json(back), to_json(c));
  SearchGrid g;
  g.nus = {0.9, 0.99};
  EXPECT_EQ(to_json(search_grid_from_json(to_json(g), true)), to_json(g));
}

TEST(StudyIo, RoundTripAndDefaults) {
  StudySpec s;
  s.kind = CaseKind::kOscillator;
  s.oscillator.cubic_stiffness = 100.0;
  s.excitation.corner_frequency = 2.0;
  s.n_train = 3;
  s.n_validation = 2;
  const auto back = study_from_json(to_json(s), true);
  EXPECT_EQ(to_json(back), to_json(s));

  const auto osc = study_from_json(json{{"case", "oscillator"}}, true);
  EXPECT_EQ(osc.dt, 0.02);
  EXPECT_EQ(osc.duration, 30.0);
  const auto b = study_from_json(json::object(), true);
  EXPECT_EQ(b.kind, CaseKind::kBuilding);
  EXPECT_EQ(b.dt, 0.025);

  const auto msg = message_of([] {
    study_from_json(json{{"excitation", {{"kind", "pink"}}}}, true);
  });
  EXPECT_NE(msg.find("study.excitation"), std::string::npos) << msg;
  EXPECT_THROW(study_from_json(json{{"building", {{"n_stories", 0}}}}, true), Error);
}

TEST(StudyIo, GenerateIsDeterministic) {
  StudySpec s;
  s.duration = 5.0;
  s.n_train = 2;
  s.n_validation = 2;
  const auto a = s.generate();
  const auto b = s.generate();
  EXPECT_EQ(a.train[1].output().values, b.train[1].output().values);
  EXPECT_NE(a.train[0].exogenous(0).values, a.validation[0].exogenous(0).values);
}
