#include <gtest/gtest.h>

#include "comfort/lstm.hpp"
#include "oracles.hpp"

using namespace comfort;

namespace {

WindowedDataset random_dataset(Rng& rng, std::size_t n, std::size_t w, std::size_t f, int fixed_label = 99) {
  std::normal_distribution<double> z(0.0, 1.0);
  WindowedDataset ds;
  ds.window_len = w;
  ds.n_features = f;
  for (std::size_t i = 0; i < n; ++i) {
    Window win;
    win.sequence.resize(w * f);
    for (auto& v : win.sequence) v = z(rng);
    const int label = fixed_label != 99 ? fixed_label : std::uniform_int_distribution<int>(-3, 3)(rng);
    win.label = ThermalLabel::from_int(label);
    win.target = encode_ordinal(win.label);
    win.participant = "P01";
    win.end_index = i;
    ds.windows.push_back(std::move(win));
  }
  return ds;
}

/// Label equals the sign bucket of the mean of feature 0 over the window.
WindowedDataset learnable_dataset(Rng& rng, std::size_t n, std::size_t w) {
  auto ds = random_dataset(rng, n, w, 2);
  for (auto& win : ds.windows) {
    double s = 0;
    for (std::size_t t = 0; t < w; ++t) s += win.sequence[t * 2];
    s /= static_cast<double>(w);
    win.label = ThermalLabel::from_int(s > 0.15 ? 2 : (s < -0.15 ? -2 : 0));
    win.target = encode_ordinal(win.label);
  }
  return ds;
}

std::vector<const Window*> pointers(const WindowedDataset& ds) {
  std::vector<const Window*> out;
  for (const auto& w : ds.windows) out.push_back(&w);
  return out;
}

}  // namespace

TEST(Lstm, ZeroParametersGiveOneHalf) {
  auto m = make_lstm(4, 8, 2, 0.5, 1);
  for (auto& l : m.params.layers) {
    l.w_input.setZero();
    l.w_hidden.setZero();
    l.bias.setZero();
  }
  m.params.w_decoder.setZero();
  m.params.b_decoder.setZero();
  std::vector<double> seq(30 * 4, 3.0);
  for (double y : lstm_forward(m, seq)) EXPECT_EQ(y, 0.5);
}

TEST(Lstm, ShapesAndDeterminism) {
  const auto m = make_lstm(4, 64, 2, 0.5, 7);
  EXPECT_EQ(m.params.layers[0].w_input.rows(), 256);
  EXPECT_EQ(m.params.layers[0].w_input.cols(), 4);
  EXPECT_EQ(m.params.layers[1].w_input.cols(), 64);
  EXPECT_EQ(m.params.w_decoder.rows(), 7);
  EXPECT_TRUE((m.params.layers[0].bias.segment(64, 64).array() == 1.0).all());
  Rng rng(3);
  std::normal_distribution<double> z;
  std::vector<double> seq(30 * 4);
  for (auto& v : seq) v = z(rng);
  const auto a = lstm_forward(m, seq);
  const auto b = lstm_forward(m, seq);
  EXPECT_EQ(a, b);
  for (double y : a) {
    EXPECT_GT(y, 0.0);
    EXPECT_LT(y, 1.0);
  }
  EXPECT_NE(lstm_forward(m, seq, true, 1), a);  // dropout active
  EXPECT_EQ(lstm_forward(m, seq, true, 1), lstm_forward(m, seq, true, 1));
}

TEST(Lstm, BatchMatchesSingleSequence) {
  Rng rng(5);
  const auto ds = random_dataset(rng, 9, 6, 3);
  const auto m = make_lstm(3, 5, 2, 0.0, 2);
  const auto probs = lstm_predict_proba(m, ds, 4);
  for (std::size_t j = 0; j < ds.size(); ++j) {
    const auto single = lstm_forward(m, ds.windows[j].sequence);
    for (std::size_t k = 0; k < 7; ++k) EXPECT_NEAR(probs[j][k], single[k], 1e-12);
  }
}

TEST(Lstm, ShapeErrors) {
  const auto m = make_lstm(4, 5, 1, 0.0, 2);
  std::vector<double> seq(7);
  try {
    lstm_forward(m, seq);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ShapeMismatch);
  }
  EXPECT_THROW(make_lstm(0, 5, 1, 0.0, 1), Error);
  Rng rng(1);
  const auto ds = random_dataset(rng, 2, 3, 3);
  const auto b = pointers(ds);
  EXPECT_THROW(lstm_forward_batch(m, make_batch(b, 3, 3), nullptr), Error);
}

TEST(Lstm, GradientCheckSpecConfiguration) {
  Rng rng(21);
  const auto ds = random_dataset(rng, 3, 4, 3);
  const auto m = make_lstm(3, 5, 1, 0.0, 4);
  EXPECT_LE(oracle::gradient_check(m, pointers(ds), 4, 3, 0), 1e-4);
}

TEST(Lstm, GradientCheckStackedWithDropout) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    Rng rng(100 + seed);
    const std::size_t f = 1 + seed, w = 2 + seed, h = 3 + seed, layers = 1 + seed % 3;
    const auto ds = random_dataset(rng, 2 + seed, w, f);
    const auto m = make_lstm(f, h, layers, seed % 2 ? 0.3 : 0.0, seed);
    EXPECT_LE(oracle::gradient_check(m, pointers(ds), w, f, 1000 + seed), 1e-4) << "seed " << seed;
  }
}

TEST(LstmTrain, ConstantTargetIsLearned) {
  Rng rng(8);
  const auto ds = random_dataset(rng, 64, 5, 3, 3);
  TrainConfig cfg;
  cfg.hidden_size = 8;
  cfg.max_epochs = 100;
  cfg.learning_rate = 1e-2;
  const auto res = lstm_train(ds, cfg);
  ASSERT_EQ(res.history.size(), 100u);
  EXPECT_LT(res.history.back().train_loss, 0.01);
  for (auto l : lstm_predict(res.model, ds)) EXPECT_EQ(l.value(), 3);
}

TEST(LstmTrain, LearnsSimpleRuleWithBothOptimizers) {
  Rng rng(9);
  const auto train = learnable_dataset(rng, 600, 6);
  const auto test = learnable_dataset(rng, 200, 6);
  for (auto opt : {Optimizer::Adam, Optimizer::Sgd}) {
    TrainConfig cfg;
    cfg.hidden_size = 12;
    cfg.max_epochs = opt == Optimizer::Adam ? 30 : 80;
    cfg.dropout = 0.1;
    cfg.optimizer = opt;
    cfg.learning_rate = opt == Optimizer::Adam ? 1e-2 : 2.0;
    const auto res = lstm_train(train, cfg);
    std::size_t hits = 0;
    const auto preds = lstm_predict(res.model, test);
    for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == test.windows[i].label;
    EXPECT_GT(static_cast<double>(hits) / static_cast<double>(preds.size()), 0.8)
        << (opt == Optimizer::Adam ? "adam" : "sgd");
    EXPECT_LT(res.history.back().train_loss, res.history.front().train_loss);
  }
}

TEST(LstmTrain, DeterministicForFixedSeed) {
  Rng rng(10);
  const auto ds = random_dataset(rng, 40, 4, 2);
  TrainConfig cfg;
  cfg.hidden_size = 6;
  cfg.max_epochs = 3;
  const auto a = lstm_train(ds, cfg);
  const auto b = lstm_train(ds, cfg);
  for (std::size_t l = 0; l < a.model.params.layers.size(); ++l) {
    EXPECT_EQ(a.model.params.layers[l].w_input, b.model.params.layers[l].w_input);
    EXPECT_EQ(a.model.params.layers[l].w_hidden, b.model.params.layers[l].w_hidden);
  }
  EXPECT_EQ(a.model.params.w_decoder, b.model.params.w_decoder);
  cfg.seed = 43;
  const auto c = lstm_train(ds, cfg);
  EXPECT_NE(a.model.params.w_decoder, c.model.params.w_decoder);
}

TEST(LstmTrain, LearningRateDecaysPerEpoch) {
  Rng rng(12);
  const auto ds = random_dataset(rng, 20, 3, 2);
  TrainConfig cfg;
  cfg.hidden_size = 4;
  cfg.max_epochs = 3;
  cfg.learning_rate = 1e-3;
  cfg.lr_decay = 0.5;
  const auto res = lstm_train(ds, cfg);
  EXPECT_DOUBLE_EQ(res.history[0].learning_rate, 1e-3);
  EXPECT_DOUBLE_EQ(res.history[2].learning_rate, 2.5e-4);
}

TEST(LstmTrain, EarlyStoppingKeepsBestEpoch) {
  Rng rng(13);
  const auto train = random_dataset(rng, 60, 4, 2);
  const auto val = random_dataset(rng, 30, 4, 2);  // unrelated labels, so validation stalls
  TrainConfig cfg;
  cfg.hidden_size = 16;
  cfg.learning_rate = 3e-2;
  cfg.max_epochs = 200;
  cfg.early_stop_patience = 3;
  const auto res = lstm_train(train, cfg, &val);
  EXPECT_LT(res.history.size(), 200u);
  EXPECT_EQ(res.history.size(), res.best_epoch + cfg.early_stop_patience);
  EXPECT_NEAR(lstm_dataset_loss(res.model, val), *res.history[res.best_epoch - 1].val_loss, 1e-12);
}

TEST(LstmTrain, ConfigValidationAndEmptyData) {
  TrainConfig cfg;
  cfg.lr_decay = 1.5;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.dropout = 1.0;
  EXPECT_THROW(cfg.validate(), Error);
  WindowedDataset empty;
  try {
    lstm_train(empty, TrainConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyDataset);
  }
  LstmModel untrained = make_lstm(2, 3, 1, 0.0, 1);
  Rng rng(1);
  try {
    lstm_predict(untrained, random_dataset(rng, 1, 2, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UntrainedModel);
  }
}
