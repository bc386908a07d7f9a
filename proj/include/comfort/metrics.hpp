#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "comfort/error.hpp"
#include "comfort/labels.hpp"

namespace comfort {

using ConfusionMatrix = std::array<std::array<std::size_t, 7>, 7>;  // [truth][pred]

/// Accuracy after coarsening to the 7-, 3- and 2-point scales. These are
/// plain accuracies, not Cohen's kappa.
struct MetricReport {
  double kappa7 = 0.0;
  double kappa3 = 0.0;
  double kappa2 = 0.0;
  ConfusionMatrix confusion7{};
  std::size_t n = 0;

  double kappa(Scale s) const {
    switch (s) {
      case Scale::SevenPoint: return kappa7;
      case Scale::ThreePoint: return kappa3;
      case Scale::TwoPoint: return kappa2;
    }
    return 0.0;
  }
};

/// Accuracy on a coarsened scale, read off the 7x7 confusion matrix.
inline double coarsened_accuracy(const ConfusionMatrix& cm, Scale s, std::size_t n) {
  std::size_t hits = 0;
  for (std::size_t t = 0; t < 7; ++t)
    for (std::size_t p = 0; p < 7; ++p)
      if (reduce_scale(ThermalLabel::from_index(t), s) == reduce_scale(ThermalLabel::from_index(p), s))
        hits += cm[t][p];
  return static_cast<double>(hits) / static_cast<double>(n);
}

inline MetricReport score(std::span<const ThermalLabel> preds, std::span<const ThermalLabel> truths) {
  if (preds.size() != truths.size()) throw Error(Errc::LengthMismatch, "predictions and truths differ in length");
  if (preds.empty()) throw Error(Errc::Empty, "nothing to score");
  MetricReport r;
  r.n = preds.size();
  for (std::size_t i = 0; i < preds.size(); ++i) ++r.confusion7[truths[i].index()][preds[i].index()];
  r.kappa7 = coarsened_accuracy(r.confusion7, Scale::SevenPoint, r.n);
  r.kappa3 = coarsened_accuracy(r.confusion7, Scale::ThreePoint, r.n);
  r.kappa2 = coarsened_accuracy(r.confusion7, Scale::TwoPoint, r.n);
  return r;
}

/// Most frequent label; ties go to the colder label.
inline ThermalLabel mode_label(std::span<const ThermalLabel> labels) {
  if (labels.empty()) throw Error(Errc::Empty, "no labels");
  std::array<std::size_t, 7> counts{};
  for (auto l : labels) ++counts[l.index()];
  std::size_t best = 0;
  for (std::size_t i = 1; i < 7; ++i)
    if (counts[i] > counts[best]) best = i;
  return ThermalLabel::from_index(best);
}

/// Constant predictor emitting the training mode, scored on eval.
inline MetricReport null_model(std::span<const ThermalLabel> train_labels, std::span<const ThermalLabel> eval_labels) {
  if (eval_labels.empty()) throw Error(Errc::Empty, "no evaluation labels");
  const auto mode = mode_label(train_labels);
  const std::vector<ThermalLabel> preds(eval_labels.size(), mode);
  return score(preds, eval_labels);
}

}  // namespace comfort
