#pragma once

// Participant-level cross-validation, feature-subset studies, permutation
// importance and the cross-dataset protocol.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "comfort/error.hpp"
#include "comfort/forest.hpp"
#include "comfort/metrics.hpp"
#include "comfort/parallel.hpp"
#include "comfort/pipeline.hpp"
#include "comfort/rng.hpp"

namespace comfort {

/// Pools two reports as if their items had been scored together.
inline MetricReport merge(const MetricReport& a, const MetricReport& b) {
  MetricReport r;
  r.n = a.n + b.n;
  for (std::size_t t = 0; t < 7; ++t)
    for (std::size_t p = 0; p < 7; ++p) r.confusion7[t][p] = a.confusion7[t][p] + b.confusion7[t][p];
  if (r.n == 0) return r;
  r.kappa7 = coarsened_accuracy(r.confusion7, Scale::SevenPoint, r.n);
  r.kappa3 = coarsened_accuracy(r.confusion7, Scale::ThreePoint, r.n);
  r.kappa2 = coarsened_accuracy(r.confusion7, Scale::TwoPoint, r.n);
  return r;
}

/// Consecutive groups of fold_size participants, in the given order.
inline std::vector<std::vector<std::size_t>> make_folds(std::size_t participants, std::size_t fold_size) {
  if (fold_size == 0 || participants == 0 || participants % fold_size != 0 || fold_size >= participants)
    throw Error(Errc::IndivisibleFolds, std::to_string(participants) + " participants cannot be split into folds of " +
                                            std::to_string(fold_size));
  std::vector<std::vector<std::size_t>> folds(participants / fold_size);
  for (std::size_t i = 0; i < participants; ++i) folds[i / fold_size].push_back(i);
  return folds;
}

struct FoldResult {
  std::vector<std::string> eval_participants;
  MetricReport report;
  std::size_t skipped = 0;
};

struct CvReport {
  std::vector<FoldResult> folds;
  std::array<double, 3> mean{};  // kappa7, kappa3, kappa2
  std::array<double, 3> std{};   // sample std, 0 for a single fold
  MetricReport pooled;

  double mean_kappa(Scale s) const { return mean[static_cast<std::size_t>(s)]; }
  double std_kappa(Scale s) const { return std[static_cast<std::size_t>(s)]; }
};

inline CvReport summarize(std::vector<FoldResult> folds) {
  CvReport cv;
  cv.folds = std::move(folds);
  const auto n = static_cast<double>(cv.folds.size());
  for (std::size_t s = 0; s < 3; ++s) {
    std::vector<double> xs;
    for (const auto& f : cv.folds) xs.push_back(f.report.kappa(static_cast<Scale>(s)));
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    cv.mean[s] = mean;
    cv.std[s] = xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  }
  for (const auto& f : cv.folds) cv.pooled = merge(cv.pooled, f.report);
  return cv;
}

/// Each fold holds out fold_size consecutive participants for evaluation
/// and trains on the rest. Sets are prepared once; folds run in parallel.
inline CvReport cross_validate(std::vector<RecordSet> sets, std::size_t fold_size, const ExperimentConfig& cfg,
                               std::size_t threads = default_threads()) {
  const auto folds = make_folds(sets.size(), fold_size);
  const auto prepared = prepare_all(std::move(sets), cfg.pipeline);
  std::vector<FoldResult> results(folds.size());
  parallel_for(
      folds.size(),
      [&](std::size_t k) {
        std::vector<RecordSet> train, eval;
        for (std::size_t i = 0; i < prepared.size(); ++i) {
          if (std::find(folds[k].begin(), folds[k].end(), i) != folds[k].end()) eval.push_back(prepared[i]);
          else train.push_back(prepared[i]);
        }
        const auto ev = evaluate(fit_pipeline(train, cfg), eval);
        for (const auto& rs : eval) results[k].eval_participants.push_back(rs.participant_id);
        results[k].report = ev.report;
        results[k].skipped = ev.skipped;
      },
      threads);
  return summarize(std::move(results));
}

inline std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Every subset of {0..k-1} whose size is in `sizes`: by ascending size,
/// then lexicographically.
inline std::vector<std::vector<std::size_t>> feature_combinations(std::size_t k, std::span<const std::size_t> sizes) {
  if (sizes.empty()) throw Error(Errc::BadSizes, "no subset sizes given");
  const std::set<std::size_t> uniq(sizes.begin(), sizes.end());
  if (*uniq.begin() < 1 || *uniq.rbegin() > k)
    throw Error(Errc::BadSizes, "subset sizes must lie in [1, " + std::to_string(k) + "]");
  std::vector<std::vector<std::size_t>> out;
  for (auto n : uniq) {
    std::vector<std::size_t> pick(n);
    std::iota(pick.begin(), pick.end(), std::size_t{0});
    while (true) {
      out.push_back(pick);
      std::size_t i = n;
      while (i > 0 && pick[i - 1] == k - n + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < n; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return out;
}

inline std::vector<std::vector<std::string>> feature_combinations(std::span<const std::string> names,
                                                                  std::span<const std::size_t> sizes) {
  std::vector<std::vector<std::string>> out;
  for (const auto& idx : feature_combinations(names.size(), sizes)) {
    std::vector<std::string> subset;
    for (auto i : idx) subset.push_back(names[i]);
    out.push_back(std::move(subset));
  }
  return out;
}

struct StudyRow {
  std::vector<std::string> features;
  CvReport cv;

  const MetricReport& report() const { return cv.pooled; }
};

struct StudyTable {
  std::vector<StudyRow> rows;  // in subset order

  /// Rows by pooled kappa7, best first.
  std::vector<const StudyRow*> ranked() const {
    std::vector<const StudyRow*> out;
    for (const auto& r : rows) out.push_back(&r);
    std::stable_sort(out.begin(), out.end(),
                     [](const auto* a, const auto* b) { return a->report().kappa7 > b->report().kappa7; });
    return out;
  }
};

/// One cross-validated model per subset, all with the same configuration
/// and seeds.
inline StudyTable run_feature_study(const std::vector<RecordSet>& sets, const std::vector<std::vector<std::string>>& subsets,
                                    const ExperimentConfig& cfg, std::size_t fold_size,
                                    std::size_t threads = default_threads()) {
  const std::set<std::vector<std::string>> distinct(subsets.begin(), subsets.end());
  if (distinct.size() != subsets.size()) throw Error(Errc::BadSizes, "feature subsets are not distinct");
  StudyTable table;
  for (const auto& subset : subsets) {
    auto row_cfg = cfg;
    row_cfg.pipeline.features = subset;
    table.rows.push_back({subset, cross_validate(sets, fold_size, row_cfg, threads)});
  }
  return table;
}

using WindowPredictor = std::function<std::vector<ThermalLabel>(const WindowedDataset&)>;

/// Baseline kappa7 minus kappa7 after shuffling one channel across
/// windows, per channel, largest drop first.
inline RankedScores permutation_importance(const WindowPredictor& predict, const WindowedDataset& ds,
                                           std::uint64_t seed) {
  if (ds.empty()) throw Error(Errc::Empty, "no windows to permute");
  const auto truths = ds.labels();
  const double baseline = score(predict(ds), truths).kappa7;
  RankedScores out;
  for (std::size_t c = 0; c < ds.n_features; ++c) {
    std::vector<std::size_t> perm(ds.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    std::shuffle(perm.begin(), perm.end(), rng);
    auto shuffled = ds;
    for (std::size_t j = 0; j < ds.size(); ++j)
      for (std::size_t t = 0; t < ds.window_len; ++t)
        shuffled.windows[j].sequence[t * ds.n_features + c] = ds.windows[perm[j]].sequence[t * ds.n_features + c];
    const double permuted = score(predict(shuffled), truths).kappa7;
    const std::string name = ds.stats ? ds.stats->channels[c].name : "f" + std::to_string(c);
    out.emplace_back(name, baseline - permuted);
  }
  sort_ranked(out);
  return out;
}

inline RankedScores permutation_importance(const TrainedPipeline& tp, const WindowedDataset& ds, std::uint64_t seed) {
  if (tp.kind == ModelKind::Pmv) throw Error(Errc::InvalidConfig, "PMV has no window features to permute");
  if ((tp.kind == ModelKind::Lstm && !tp.lstm) || (tp.kind == ModelKind::Forest && !tp.forest) ||
      (tp.kind == ModelKind::Null && !tp.mode))
    throw Error(Errc::UntrainedModel, "pipeline has not been fitted");
  return permutation_importance([&](const WindowedDataset& d) { return predict_windows(tp, d); }, ds, seed);
}

/// Fit on source A, score on source B.
inline Evaluation cross_dataset_eval(std::vector<RecordSet> train, std::vector<RecordSet> eval,
                                     const ExperimentConfig& cfg) {
  require_features(eval, cfg.pipeline.features);
  return run_experiment(std::move(train), std::move(eval), cfg);
}

}  // namespace comfort
