#include <gtest/gtest.h>

#include "comfort/config.hpp"
#include "comfort/model_io.hpp"
#include "fixtures.hpp"

using namespace comfort;

namespace {

Errc config_error(const nlohmann::json& j) {
  RunConfig c;
  try {
    read_into(j, c);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << j.dump();
  return Errc::Io;
}

}  // namespace

TEST(Config, RoundTrip) {
  RunConfig c;
  c.experiment.lstm.max_epochs = 7;
  c.experiment.lstm.optimizer = Optimizer::Sgd;
  c.experiment.pipeline.features = {"gsr", "humidity"};
  c.experiment.forest.trees = 12;
  c.experiment.validation_subjects = 1;
  c.profile.scenario = Scenario::Vehicle;
  c.profile.vehicle_events = {{3.0, sim::VehicleEvent::WindowOpen}};
  c.study.sizes = {2};
  c.seed = 9;
  const auto j = to_json(c);
  RunConfig back;
  read_into(j, back);
  EXPECT_EQ(to_json(back), j);
  EXPECT_EQ(back.experiment.lstm.optimizer, Optimizer::Sgd);
  EXPECT_EQ(back.profile.vehicle_events, c.profile.vehicle_events);
}

TEST(Config, DefaultsMatchDocumentedValues) {
  const TrainConfig t;
  EXPECT_EQ(t.learning_rate, 1e-5);
  EXPECT_EQ(t.lr_decay, 0.99);
  EXPECT_EQ(t.batch_size, 16u);
  EXPECT_EQ(t.max_epochs, 100u);
  EXPECT_EQ(t.dropout, 0.5);
  EXPECT_EQ(t.hidden_size, 64u);
  EXPECT_EQ(t.num_layers, 2u);
  const ForestConfig f;
  EXPECT_EQ(f.trees, 400u);
  EXPECT_EQ(f.max_depth, 8u);
}

TEST(Config, ModelKindSwitchesPipelineDefaults) {
  RunConfig c;
  read_into({{"kind", "forest"}}, c);
  EXPECT_EQ(c.experiment.kind, ModelKind::Forest);
  EXPECT_EQ(c.experiment.pipeline.window_len, 1u);
  read_into({{"kind", "lstm"}, {"pipeline", {{"window_len", 12}}}}, c);
  EXPECT_EQ(c.experiment.pipeline.window_len, 12u);
}

TEST(Config, Rejections) {
  EXPECT_EQ(config_error({{"epochs", 3}}), Errc::InvalidConfig);
  EXPECT_EQ(config_error({{"lstm", {{"learning_rate", "fast"}}}}), Errc::InvalidConfig);
  EXPECT_EQ(config_error({{"lstm", {{"optimizer", "rmsprop"}}}}), Errc::InvalidConfig);
  EXPECT_EQ(config_error({{"lstm", {{"lr_decay", 2.0}}}}), Errc::InvalidConfig);
  EXPECT_EQ(config_error({{"kind", "svm"}}), Errc::InvalidConfig);
  EXPECT_EQ(config_error({{"pipeline", {{"window_len", 0}}}}), Errc::InvalidConfig);
  EXPECT_EQ(config_error({{"lstm", 3}}), Errc::InvalidConfig);
}

TEST(Config, Files) {
  fixture::TempDir dir("config");
  RunConfig c;
  c.subjects = 4;
  write_json_file(dir.path / "run.json", to_json(c));
  RunConfig back;
  read_into(read_json_file(dir.path / "run.json"), back);
  EXPECT_EQ(back.subjects, 4u);
  EXPECT_THROW(read_json_file(dir.path / "absent.json"), Error);
}

TEST(ModelIo, LstmPipelineRoundTrip) {
  const auto cohort = fixture::small_cohort(2, 3);
  auto cfg = ExperimentConfig::defaults_for(ModelKind::Lstm);
  cfg.pipeline.features = {"ambient_temp_pce", "gender"};
  cfg.lstm.hidden_size = 4;
  cfg.lstm.max_epochs = 1;
  const auto prepared = prepare_all(cohort, cfg.pipeline);
  const auto tp = fit_pipeline(prepared, cfg);
  fixture::TempDir dir("model");
  save_model(tp, dir.path / "m.json");
  const auto back = load_model(dir.path / "m.json");
  const auto ds = window_all(prepared, tp.spec, tp.pipeline);
  const auto a = lstm_predict_proba(*tp.lstm, ds, 64);
  const auto b = lstm_predict_proba(*back.lstm, ds, 64);
  EXPECT_EQ(a, b);
  EXPECT_EQ(back.pipeline.features, cfg.pipeline.features);
}

TEST(ModelIo, ForestAndNullRoundTrip) {
  const auto cohort = fixture::small_cohort(2, 4);
  for (auto kind : {ModelKind::Forest, ModelKind::Null}) {
    auto cfg = ExperimentConfig::defaults_for(kind);
    cfg.pipeline.features = {"ambient_temp_pce", "humidity"};
    cfg.forest.trees = 5;
    const auto prepared = prepare_all(cohort, cfg.pipeline);
    const auto tp = fit_pipeline(prepared, cfg);
    const auto back = pipeline_from_json(pipeline_to_json(tp));
    const auto ds = window_all(prepared, tp.spec, tp.pipeline);
    EXPECT_EQ(predict_windows(back, ds), predict_windows(tp, ds)) << to_string(kind);
  }
}

TEST(ModelIo, RejectsForeignDocuments) {
  EXPECT_THROW(pipeline_from_json({{"format", "other"}}), Error);
  auto j = pipeline_to_json(TrainedPipeline{});
  j["version"] = 99;
  EXPECT_THROW(pipeline_from_json(j), Error);
}
