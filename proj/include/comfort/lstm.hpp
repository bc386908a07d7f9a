#pragma once

// Stacked LSTM encoder with an ordinal decoder (affine map to 7 logits and an
// element-wise sigmoid), trained on MSE against cumulative binary targets by
// backpropagation through time.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "comfort/error.hpp"
#include "comfort/labels.hpp"
#include "comfort/preprocess.hpp"
#include "comfort/rng.hpp"

namespace comfort {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline constexpr std::size_t kOrdinalOutputs = ThermalLabel::kClasses;

/// Weights of one recurrent layer; gate blocks are stacked [input; forget;
/// cell; output], each hidden_size rows.
struct LstmLayer {
  Mat w_input;   // 4H x in
  Mat w_hidden;  // 4H x H
  Vec bias;      // 4H
};

struct LstmParams {
  std::vector<LstmLayer> layers;
  Mat w_decoder;  // 7 x H
  Vec b_decoder;  // 7

  /// Visits every parameter tensor as a flat span, in a fixed order.
  template <class Fn>
  void for_each_tensor(Fn&& fn) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto tag = "layer" + std::to_string(l) + ".";
      fn(tag + "w_input", std::span<double>(layers[l].w_input.data(), layers[l].w_input.size()));
      fn(tag + "w_hidden", std::span<double>(layers[l].w_hidden.data(), layers[l].w_hidden.size()));
      fn(tag + "bias", std::span<double>(layers[l].bias.data(), layers[l].bias.size()));
    }
    fn(std::string("decoder.weight"), std::span<double>(w_decoder.data(), w_decoder.size()));
    fn(std::string("decoder.bias"), std::span<double>(b_decoder.data(), b_decoder.size()));
  }

  std::size_t parameter_count() {
    std::size_t n = 0;
    for_each_tensor([&n](const std::string&, std::span<double> t) { n += t.size(); });
    return n;
  }

  /// Zero tensors with the same shapes.
  LstmParams zeros_like() const {
    LstmParams z;
    for (const auto& l : layers)
      z.layers.push_back({Mat::Zero(l.w_input.rows(), l.w_input.cols()), Mat::Zero(l.w_hidden.rows(), l.w_hidden.cols()),
                          Vec::Zero(l.bias.size())});
    z.w_decoder = Mat::Zero(w_decoder.rows(), w_decoder.cols());
    z.b_decoder = Vec::Zero(b_decoder.size());
    return z;
  }
};

struct LstmModel {
  std::size_t input_size = 0;
  std::size_t hidden_size = 64;
  std::size_t num_layers = 2;
  double dropout_p = 0.5;  // between recurrent layers, train time only
  LstmParams params;
  bool trained = false;
};

/// Uniform(-1/sqrt(H), 1/sqrt(H)) everywhere, forget-gate bias set to 1.
inline LstmModel make_lstm(std::size_t input_size, std::size_t hidden_size, std::size_t num_layers, double dropout_p,
                           std::uint64_t seed) {
  if (input_size == 0 || hidden_size == 0 || num_layers == 0)
    throw Error(Errc::ShapeMismatch, "LSTM dimensions must be positive");
  LstmModel m;
  m.input_size = input_size;
  m.hidden_size = hidden_size;
  m.num_layers = num_layers;
  m.dropout_p = dropout_p;
  const auto h = static_cast<Eigen::Index>(hidden_size);
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_size));
  std::uniform_real_distribution<double> u(-bound, bound);
  auto fill = [&](auto& x) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  };
  for (std::size_t l = 0; l < num_layers; ++l) {
    const auto in = static_cast<Eigen::Index>(l == 0 ? input_size : hidden_size);
    LstmLayer layer{Mat(4 * h, in), Mat(4 * h, h), Vec(4 * h)};
    fill(layer.w_input);
    fill(layer.w_hidden);
    fill(layer.bias);
    layer.bias.segment(h, h).setOnes();
    m.params.layers.push_back(std::move(layer));
  }
  m.params.w_decoder = Mat(static_cast<Eigen::Index>(kOrdinalOutputs), h);
  m.params.b_decoder = Vec(static_cast<Eigen::Index>(kOrdinalOutputs));
  fill(m.params.w_decoder);
  fill(m.params.b_decoder);
  return m;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

namespace lstm_detail {

template <class Derived>
auto sigmoid_array(const Eigen::ArrayBase<Derived>& x) {
  return (1.0 + (-x).exp()).inverse();
}

// Eigen's double tanh is scalar; this form vectorizes through exp.
template <class Derived>
auto tanh_array(const Eigen::ArrayBase<Derived>& x) {
  return 2.0 * (1.0 + (-2.0 * x).exp()).inverse() - 1.0;
}

/// Activations of one layer over all steps. Column t*B + j holds step t of
/// sequence j.
struct LayerTape {
  Mat x;       // layer input, in x TB
  Mat gates;   // activated gates [i; f; g; o], 4H x TB
  Mat c;       // cell state, H x TB
  Mat tanh_c;  // H x TB
  Mat h;       // hidden output, H x TB
};

struct Tape {
  std::size_t steps = 0;
  std::size_t batch = 0;
  std::vector<LayerTape> layers;
  std::vector<Mat> masks;  // per layer boundary, scaled dropout masks (H x TB)
  Mat y;                   // 7 x B sigmoid outputs
};

}  // namespace lstm_detail

/// A batch of equal-length sequences; column t*batch + j of `inputs` is time
/// step t of sequence j.
struct SequenceBatch {
  Mat inputs;  // features x (steps * batch)
  std::size_t steps = 0;
  std::size_t batch = 0;
};

inline SequenceBatch make_batch(std::span<const Window* const> windows, std::size_t window_len, std::size_t n_features) {
  SequenceBatch b;
  b.batch = windows.size();
  b.steps = window_len;
  const auto f = static_cast<Eigen::Index>(n_features);
  const auto B = windows.size();
  b.inputs.resize(f, static_cast<Eigen::Index>(window_len * B));
  for (std::size_t j = 0; j < B; ++j) {
    const auto& seq = windows[j]->sequence;
    if (seq.size() != window_len * n_features) throw Error(Errc::ShapeMismatch, "window has the wrong shape");
    for (std::size_t t = 0; t < window_len; ++t)
      for (Eigen::Index k = 0; k < f; ++k)
        b.inputs(k, static_cast<Eigen::Index>(t * B + j)) = seq[t * n_features + static_cast<std::size_t>(k)];
  }
  return b;
}

/// Batched forward pass. With `rng`, dropout is active (train mode).
inline lstm_detail::Tape lstm_forward_batch(const LstmModel& m, const SequenceBatch& xb, Rng* rng) {
  using namespace lstm_detail;
  if (xb.steps == 0 || xb.batch == 0) throw Error(Errc::ShapeMismatch, "empty sequence batch");
  if (static_cast<std::size_t>(xb.inputs.rows()) != m.input_size)
    throw Error(Errc::ShapeMismatch, "input has " + std::to_string(xb.inputs.rows()) + " features, model expects " +
                                         std::to_string(m.input_size));
  const auto H = static_cast<Eigen::Index>(m.hidden_size);
  const auto B = static_cast<Eigen::Index>(xb.batch);
  const auto T = static_cast<Eigen::Index>(xb.steps);
  const bool dropout = rng != nullptr && m.dropout_p > 0.0;
  std::bernoulli_distribution keep(1.0 - m.dropout_p);
  const double scale = dropout ? 1.0 / (1.0 - m.dropout_p) : 1.0;

  Tape tape;
  tape.steps = xb.steps;
  tape.batch = xb.batch;
  tape.layers.resize(m.num_layers);
  for (std::size_t l = 0; l < m.num_layers; ++l) {
    const auto& L = m.params.layers[l];
    auto& lt = tape.layers[l];
    if (l == 0) {
      lt.x = xb.inputs;
    } else if (dropout) {
      Mat mask(H, T * B);
      for (Eigen::Index k = 0; k < mask.size(); ++k) mask.data()[k] = keep(*rng) ? scale : 0.0;
      lt.x = tape.layers[l - 1].h.cwiseProduct(mask);
      tape.masks.push_back(std::move(mask));
    } else {
      lt.x = tape.layers[l - 1].h;
    }
    lt.gates.noalias() = L.w_input * lt.x;
    lt.gates.colwise() += L.bias;
    lt.c.resize(H, T * B);
    lt.tanh_c.resize(H, T * B);
    lt.h.resize(H, T * B);
    for (Eigen::Index t = 0; t < T; ++t) {
      auto z = lt.gates.middleCols(t * B, B);
      if (t > 0) z.noalias() += L.w_hidden * lt.h.middleCols((t - 1) * B, B);
      z.topRows(2 * H) = sigmoid_array(z.topRows(2 * H).array()).matrix();
      z.middleRows(2 * H, H) = tanh_array(z.middleRows(2 * H, H).array()).matrix();
      z.bottomRows(H) = sigmoid_array(z.bottomRows(H).array()).matrix();
      auto c = lt.c.middleCols(t * B, B);
      c = z.topRows(H).cwiseProduct(z.middleRows(2 * H, H));
      if (t > 0) c += z.middleRows(H, H).cwiseProduct(lt.c.middleCols((t - 1) * B, B));
      lt.tanh_c.middleCols(t * B, B) = tanh_array(c.array()).matrix();
      lt.h.middleCols(t * B, B) = z.bottomRows(H).cwiseProduct(lt.tanh_c.middleCols(t * B, B));
    }
  }
  Mat logits = m.params.w_decoder * tape.layers.back().h.middleCols((T - 1) * B, B);
  logits.colwise() += m.params.b_decoder;
  tape.y = sigmoid_array(logits.array()).matrix();
  return tape;
}

/// Single-sequence forward pass; `seq` is window_len x input_size row-major.
/// Dropout is applied only in train mode, with masks drawn from `seed`.
inline OrdinalVector lstm_forward(const LstmModel& m, std::span<const double> seq, bool train_mode = false,
                                  std::uint64_t seed = 0) {
  if (m.input_size == 0 || seq.size() % m.input_size != 0 || seq.empty())
    throw Error(Errc::ShapeMismatch, "sequence length " + std::to_string(seq.size()) + " is not a multiple of " +
                                         std::to_string(m.input_size));
  SequenceBatch b;
  b.batch = 1;
  b.steps = seq.size() / m.input_size;
  b.inputs = Eigen::Map<const Mat>(seq.data(), static_cast<Eigen::Index>(m.input_size), static_cast<Eigen::Index>(b.steps));
  Rng rng(seed);
  const auto tape = lstm_forward_batch(m, b, train_mode ? &rng : nullptr);
  OrdinalVector out{};
  for (std::size_t k = 0; k < kOrdinalOutputs; ++k) out[k] = tape.y(static_cast<Eigen::Index>(k), 0);
  return out;
}

/// Mean squared error over the 7 outputs and the batch.
inline double mse_loss(const Mat& y, const Mat& targets) {
  return (y - targets).squaredNorm() / static_cast<double>(y.size());
}

/// Gradient of mse_loss with respect to every parameter, by BPTT through the
/// recorded tape.
inline LstmParams lstm_backward(const LstmModel& m, const lstm_detail::Tape& tape, const Mat& targets) {
  const auto H = static_cast<Eigen::Index>(m.hidden_size);
  const auto B = static_cast<Eigen::Index>(tape.batch);
  const auto T = static_cast<Eigen::Index>(tape.steps);
  LstmParams grad;
  grad.layers.resize(m.num_layers);

  const Mat dy = 2.0 * (tape.y - targets) / static_cast<double>(tape.y.size());
  const Mat dlogits = (dy.array() * tape.y.array() * (1.0 - tape.y.array())).matrix();
  const auto h_last = tape.layers.back().h.middleCols((T - 1) * B, B);
  grad.w_decoder.noalias() = dlogits * h_last.transpose();
  grad.b_decoder = dlogits.rowwise().sum();

  // Gradient arriving at each layer's hidden outputs from above.
  Mat dh_ext = Mat::Zero(H, T * B);
  dh_ext.middleCols((T - 1) * B, B).noalias() = m.params.w_decoder.transpose() * dlogits;

  Mat dz(4 * H, T * B);
  Mat dh_next(H, B), dc_next(H, B), dc(H, B);
  for (std::size_t l = m.num_layers; l-- > 0;) {
    const auto& L = m.params.layers[l];
    const auto& lt = tape.layers[l];
    dh_next.setZero();
    dc_next.setZero();
    for (Eigen::Index t = T - 1; t >= 0; --t) {
      const auto cols = t * B;
      const auto gates = lt.gates.middleCols(cols, B).array();
      const auto i = gates.topRows(H), f = gates.middleRows(H, H), g = gates.middleRows(2 * H, H),
                 o = gates.bottomRows(H);
      const auto tanh_c = lt.tanh_c.middleCols(cols, B).array();
      const auto dh = dh_ext.middleCols(cols, B).array() + dh_next.array();
      dc.array() = dc_next.array() + dh * o * (1.0 - tanh_c.square());
      auto dzt = dz.middleCols(cols, B);
      dzt.topRows(H).array() = dc.array() * g * i * (1.0 - i);
      if (t > 0) dzt.middleRows(H, H).array() = dc.array() * lt.c.middleCols(cols - B, B).array() * f * (1.0 - f);
      else dzt.middleRows(H, H).setZero();
      dzt.middleRows(2 * H, H).array() = dc.array() * i * (1.0 - g.square());
      dzt.bottomRows(H).array() = dh * tanh_c * o * (1.0 - o);
      dc_next.array() = dc.array() * f;
      dh_next.noalias() = L.w_hidden.transpose() * dzt;
    }
    auto& G = grad.layers[l];
    G.w_input.noalias() = dz * lt.x.transpose();
    G.bias = dz.rowwise().sum();
    G.w_hidden.noalias() = dz.rightCols((T - 1) * B) * lt.h.leftCols((T - 1) * B).transpose();
    if (l > 0) {
      dh_ext.noalias() = L.w_input.transpose() * dz;
      if (!tape.masks.empty()) dh_ext.array() *= tape.masks[l - 1].array();
    }
  }
  return grad;
}


inline Mat make_targets(std::span<const Window* const> windows) {
  Mat t(static_cast<Eigen::Index>(kOrdinalOutputs), static_cast<Eigen::Index>(windows.size()));
  for (std::size_t j = 0; j < windows.size(); ++j)
    for (std::size_t k = 0; k < kOrdinalOutputs; ++k)
      t(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = windows[j]->target[k];
  return t;
}

enum class Optimizer { Adam, Sgd };

struct TrainConfig {
  double learning_rate = 1e-5;
  double lr_decay = 0.99;  // per epoch
  std::size_t batch_size = 16;
  std::size_t max_epochs = 100;
  double dropout = 0.5;
  std::size_t hidden_size = 64;
  std::size_t num_layers = 2;
  std::uint64_t seed = 42;
  std::size_t early_stop_patience = 10;  // epochs without validation improvement
  Optimizer optimizer = Optimizer::Adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const {
    if (!(learning_rate > 0)) throw Error(Errc::InvalidConfig, "learning_rate must be > 0");
    if (!(lr_decay > 0 && lr_decay <= 1)) throw Error(Errc::InvalidConfig, "lr_decay must lie in (0, 1]");
    if (batch_size == 0) throw Error(Errc::InvalidConfig, "batch_size must be > 0");
    if (max_epochs == 0) throw Error(Errc::InvalidConfig, "max_epochs must be > 0");
    if (!(dropout >= 0 && dropout < 1)) throw Error(Errc::InvalidConfig, "dropout must lie in [0, 1)");
    if (hidden_size == 0 || num_layers == 0) throw Error(Errc::InvalidConfig, "network dimensions must be > 0");
    if (early_stop_patience == 0) throw Error(Errc::InvalidConfig, "early_stop_patience must be > 0");
  }
};

struct EpochStats {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;
  std::optional<double> val_loss;
  std::optional<double> val_kappa7;
};

struct TrainResult {
  LstmModel model;
  std::vector<EpochStats> history;
  std::size_t best_epoch = 0;
};

namespace lstm_detail {

class AdamState {
 public:
  explicit AdamState(const LstmParams& like) : m_(like.zeros_like()), v_(like.zeros_like()) {}

  void step(LstmParams& params, LstmParams& grad, double lr, const TrainConfig& cfg) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(t_));
    std::vector<std::span<double>> p, g, m, v;
    params.for_each_tensor([&](const std::string&, std::span<double> s) { p.push_back(s); });
    grad.for_each_tensor([&](const std::string&, std::span<double> s) { g.push_back(s); });
    m_.for_each_tensor([&](const std::string&, std::span<double> s) { m.push_back(s); });
    v_.for_each_tensor([&](const std::string&, std::span<double> s) { v.push_back(s); });
    for (std::size_t k = 0; k < p.size(); ++k) {
      for (std::size_t i = 0; i < p[k].size(); ++i) {
        m[k][i] = cfg.adam_beta1 * m[k][i] + (1.0 - cfg.adam_beta1) * g[k][i];
        v[k][i] = cfg.adam_beta2 * v[k][i] + (1.0 - cfg.adam_beta2) * g[k][i] * g[k][i];
        p[k][i] -= lr * (m[k][i] / c1) / (std::sqrt(v[k][i] / c2) + cfg.adam_eps);
      }
    }
  }

 private:
  LstmParams m_, v_;
  std::uint64_t t_ = 0;
};

inline void sgd_step(LstmParams& params, LstmParams& grad, double lr) {
  std::vector<std::span<double>> g;
  grad.for_each_tensor([&](const std::string&, std::span<double> s) { g.push_back(s); });
  std::size_t k = 0;
  params.for_each_tensor([&](const std::string&, std::span<double> p) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[k][i];
    ++k;
  });
}

}  // namespace lstm_detail

/// Sigmoid outputs for every window, in batches.
inline std::vector<OrdinalVector> lstm_predict_proba(const LstmModel& m, const WindowedDataset& ds,
                                                     std::size_t batch_size = 256) {
  std::vector<OrdinalVector> out;
  out.reserve(ds.size());
  std::vector<const Window*> ptrs;
  for (std::size_t start = 0; start < ds.size(); start += batch_size) {
    ptrs.clear();
    for (std::size_t j = start; j < std::min(ds.size(), start + batch_size); ++j) ptrs.push_back(&ds.windows[j]);
    const auto tape = lstm_forward_batch(m, make_batch(ptrs, ds.window_len, ds.n_features), nullptr);
    for (Eigen::Index j = 0; j < tape.y.cols(); ++j) {
      OrdinalVector v{};
      for (std::size_t k = 0; k < kOrdinalOutputs; ++k) v[k] = tape.y(static_cast<Eigen::Index>(k), j);
      out.push_back(v);
    }
  }
  return out;
}

inline std::vector<ThermalLabel> lstm_predict(const LstmModel& m, const WindowedDataset& ds) {
  if (!m.trained) throw Error(Errc::UntrainedModel, "LSTM has not been trained");
  std::vector<ThermalLabel> out;
  for (const auto& p : lstm_predict_proba(m, ds)) out.push_back(decode_ordinal(p));
  return out;
}

inline double lstm_dataset_loss(const LstmModel& m, const WindowedDataset& ds) {
  const auto probs = lstm_predict_proba(m, ds);
  double total = 0.0;
  for (std::size_t j = 0; j < ds.size(); ++j)
    for (std::size_t k = 0; k < kOrdinalOutputs; ++k) {
      const double d = probs[j][k] - ds.windows[j].target[k];
      total += d * d;
    }
  return total / static_cast<double>(ds.size() * kOrdinalOutputs);
}

/// Mini-batch training on MSE. The learning rate is multiplied by lr_decay
/// after each epoch. With a validation set the parameters of the epoch with
/// the lowest validation loss are returned and training stops after
/// `early_stop_patience` epochs without improvement.
inline TrainResult lstm_train(const WindowedDataset& ds, const TrainConfig& cfg,
                              const WindowedDataset* validation = nullptr,
                              const std::function<void(const EpochStats&)>& on_epoch = {}) {
  cfg.validate();
  if (ds.empty()) throw Error(Errc::EmptyDataset, "no training windows");
  TrainResult res;
  res.model = make_lstm(ds.n_features, cfg.hidden_size, cfg.num_layers, cfg.dropout, derive_seed(cfg.seed, "init"));
  auto& model = res.model;
  Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));
  Rng dropout_rng(derive_seed(cfg.seed, "dropout"));
  lstm_detail::AdamState adam(model.params);

  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<const Window*> batch;
  double lr = cfg.learning_rate;
  double best_val = std::numeric_limits<double>::infinity();
  LstmParams best_params = model.params;
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      batch.clear();
      for (std::size_t j = start; j < std::min(order.size(), start + cfg.batch_size); ++j)
        batch.push_back(&ds.windows[order[j]]);
      const auto xb = make_batch(batch, ds.window_len, ds.n_features);
      const auto targets = make_targets(batch);
      const auto tape = lstm_forward_batch(model, xb, &dropout_rng);
      loss_sum += mse_loss(tape.y, targets) * static_cast<double>(batch.size());
      seen += batch.size();
      auto grad = lstm_backward(model, tape, targets);
      if (cfg.optimizer == Optimizer::Adam) adam.step(model.params, grad, lr, cfg);
      else lstm_detail::sgd_step(model.params, grad, lr);
    }
    EpochStats st;
    st.epoch = epoch;
    st.learning_rate = lr;
    st.train_loss = loss_sum / static_cast<double>(seen);
    model.trained = true;
    if (validation && !validation->empty()) {
      st.val_loss = lstm_dataset_loss(model, *validation);
      const auto preds = lstm_predict(model, *validation);
      std::size_t hits = 0;
      for (std::size_t j = 0; j < preds.size(); ++j) hits += preds[j] == validation->windows[j].label;
      st.val_kappa7 = static_cast<double>(hits) / static_cast<double>(preds.size());
      if (*st.val_loss < best_val) {
        best_val = *st.val_loss;
        best_params = model.params;
        res.best_epoch = epoch;
        since_best = 0;
      } else {
        ++since_best;
      }
    } else {
      res.best_epoch = epoch;
    }
    res.history.push_back(st);
    if (on_epoch) on_epoch(st);
    lr *= cfg.lr_decay;
    if (validation && !validation->empty() && since_best >= cfg.early_stop_patience) break;
  }
  if (validation && !validation->empty()) model.params = best_params;
  return res;
}

}  // namespace comfort
