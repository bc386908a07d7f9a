#pragma once

// Train/evaluate glue shared by the study tools and the CLI: preprocessing
// of participant sets, model fitting and window-level prediction.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "comfort/error.hpp"
#include "comfort/forest.hpp"
#include "comfort/lstm.hpp"
#include "comfort/metrics.hpp"
#include "comfort/pmv.hpp"
#include "comfort/preprocess.hpp"
#include "comfort/record.hpp"

namespace comfort {

enum class ModelKind { Lstm, Forest, Pmv, Null };

inline std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Lstm: return "lstm";
    case ModelKind::Forest: return "forest";
    case ModelKind::Pmv: return "pmv";
    case ModelKind::Null: return "null";
  }
  return "?";
}

inline ModelKind model_kind_from_string(std::string_view s) {
  for (auto k : {ModelKind::Lstm, ModelKind::Forest, ModelKind::Pmv, ModelKind::Null})
    if (to_string(k) == s) return k;
  throw Error(Errc::InvalidConfig, "unknown model kind '" + std::string(s) + "'");
}

struct PipelineConfig {
  std::vector<std::string> features;
  std::size_t window_len = 30;
  std::size_t downsample_stride = 10;
  std::size_t forecast_gap = 0;  // in downsampled samples
  bool filter_outliers = true;
  double augment_mu = 0.0;
  double augment_sigma = 0.0;
  std::uint64_t seed = 42;

  /// Sequence models see 10 s windows at 3 Hz; the forest sees single rows
  /// at 0.3 Hz.
  static PipelineConfig defaults_for(ModelKind kind) {
    PipelineConfig p;
    if (kind != ModelKind::Lstm) {
      p.window_len = 1;
      p.downsample_stride = 100;
    }
    return p;
  }

  void validate() const {
    if (window_len == 0) throw Error(Errc::InvalidConfig, "window_len must be >= 1");
    if (downsample_stride == 0) throw Error(Errc::InvalidConfig, "downsample_stride must be >= 1");
    if (!(augment_sigma >= 0)) throw Error(Errc::InvalidConfig, "augment_sigma must be >= 0");
  }
};

struct ExperimentConfig {
  ModelKind kind = ModelKind::Lstm;
  PipelineConfig pipeline;
  TrainConfig lstm;
  ForestConfig forest;
  std::size_t validation_subjects = 0;  // trailing training participants held out for early stopping

  static ExperimentConfig defaults_for(ModelKind kind) {
    ExperimentConfig c;
    c.kind = kind;
    c.pipeline = PipelineConfig::defaults_for(kind);
    return c;
  }
};

/// Label extrapolation, optional outlier filter and downsampling, per
/// participant.
inline RecordSet prepare(RecordSet rs, const PipelineConfig& p) {
  rs = extrapolate_labels(std::move(rs));
  if (p.filter_outliers) rs = remove_outliers(std::move(rs));
  return downsample(std::move(rs), p.downsample_stride);
}

inline std::vector<RecordSet> prepare_all(std::vector<RecordSet> sets, const PipelineConfig& p) {
  for (auto& rs : sets) rs = prepare(std::move(rs), p);
  return sets;
}

/// Throws MissingFeature when a numeric feature is NA anywhere in `sets`.
inline void require_features(std::span<const RecordSet> sets, std::span<const std::string> features) {
  for (const auto& f : features) {
    if (categorical_vocabulary(f)) continue;
    if (!is_numeric_column(f)) throw Error(Errc::MissingFeature, "unknown feature column '" + f + "'");
    for (const auto& rs : sets)
      for (const auto& r : rs.records)
        if (!numeric_field(r, f))
          throw Error(Errc::MissingFeature, "feature '" + f + "' is missing for participant '" + rs.participant_id + "'");
  }
}

inline WindowedDataset window_all(std::span<const RecordSet> sets, const FeatureSpec& spec, const PipelineConfig& p) {
  WindowedDataset out;
  bool first = true;
  for (const auto& rs : sets) {
    auto ds = make_windows(rs, spec, p.window_len, p.forecast_gap, p.downsample_stride);
    if (first) {
      out = std::move(ds);
      first = false;
    } else {
      out.append(std::move(ds));
    }
  }
  if (first) {
    out.window_len = p.window_len;
    out.forecast_gap = p.forecast_gap;
    out.stride_downsample = p.downsample_stride;
    out.stats = spec.stats;
    out.n_features = spec.n_channels();
  }
  return out;
}

struct TrainedPipeline {
  ModelKind kind = ModelKind::Lstm;
  PipelineConfig pipeline;
  FeatureSpec spec;
  std::optional<LstmModel> lstm;
  std::optional<ForestModel> forest;
  std::optional<ThermalLabel> mode;  // null model
  std::vector<EpochStats> history;
};

/// PMV inputs of one record; absent sensors fall back to the ambient
/// temperature and typical office values.
inline pmv::PmvInput pmv_input(const ComfortRecord& r) {
  pmv::PmvInput in;
  in.ambient_temp = r.ambient_temp_pce.value_or(r.ambient_temp_arduino);
  in.radiation_temp = r.radiation_temp.value_or(in.ambient_temp);
  in.air_velocity = r.air_velocity.value_or(0.1);
  in.rel_humidity = r.humidity;
  in.metabolic_rate = r.metabolic_rate.value_or(1.1);
  in.clothing = r.clothing;
  return in;
}

/// Fits on already prepared participant sets.
inline TrainedPipeline fit_pipeline(std::span<const RecordSet> train, const ExperimentConfig& cfg) {
  cfg.pipeline.validate();
  if (train.empty()) throw Error(Errc::EmptyDataset, "no training participants");
  TrainedPipeline tp;
  tp.kind = cfg.kind;
  tp.pipeline = cfg.pipeline;
  if (cfg.kind == ModelKind::Pmv) return tp;

  std::span<const RecordSet> fit_sets = train;
  std::span<const RecordSet> val_sets;
  if (cfg.kind == ModelKind::Lstm && cfg.validation_subjects > 0) {
    if (cfg.validation_subjects >= train.size())
      throw Error(Errc::InvalidConfig, "validation_subjects leaves no training participants");
    fit_sets = train.first(train.size() - cfg.validation_subjects);
    val_sets = train.last(cfg.validation_subjects);
  }
  require_features(train, cfg.pipeline.features);
  tp.spec = fit_feature_spec(fit_sets, cfg.pipeline.features);
  auto ds = window_all(fit_sets, tp.spec, cfg.pipeline);
  if (ds.empty()) throw Error(Errc::EmptyDataset, "training participants yield no windows");

  switch (cfg.kind) {
    case ModelKind::Null: tp.mode = mode_label(ds.labels()); break;
    case ModelKind::Forest: tp.forest = rf_train(table_from_windows(ds), cfg.forest); break;
    case ModelKind::Lstm: {
      ds = augment_gaussian(std::move(ds), cfg.pipeline.augment_mu, cfg.pipeline.augment_sigma,
                            derive_seed(cfg.pipeline.seed, "augment"));
      std::optional<WindowedDataset> val;
      if (!val_sets.empty()) val = window_all(val_sets, tp.spec, cfg.pipeline);
      auto res = lstm_train(ds, cfg.lstm, val ? &*val : nullptr);
      tp.lstm = std::move(res.model);
      tp.history = std::move(res.history);
      break;
    }
    case ModelKind::Pmv: break;
  }
  return tp;
}

inline std::vector<ThermalLabel> predict_windows(const TrainedPipeline& tp, const WindowedDataset& ds) {
  switch (tp.kind) {
    case ModelKind::Lstm:
      if (!tp.lstm) throw Error(Errc::UntrainedModel, "pipeline has no LSTM");
      return lstm_predict(*tp.lstm, ds);
    case ModelKind::Forest:
      if (!tp.forest) throw Error(Errc::UntrainedModel, "pipeline has no forest");
      return rf_predict(*tp.forest, table_from_windows(ds));
    case ModelKind::Null:
      if (!tp.mode) throw Error(Errc::UntrainedModel, "null model has no mode");
      return std::vector<ThermalLabel>(ds.size(), *tp.mode);
    case ModelKind::Pmv: break;
  }
  throw Error(Errc::InvalidConfig, "PMV predictions are made per record, not per window");
}

struct Evaluation {
  MetricReport report;
  std::vector<ThermalLabel> preds;
  std::vector<ThermalLabel> truths;
  std::size_t skipped = 0;  // PMV rows outside the engine envelope
};

/// PMV at record e predicts the label at e + gap.
inline Evaluation evaluate_pmv(std::span<const RecordSet> sets, std::size_t gap) {
  if (std::all_of(sets.begin(), sets.end(), [](const RecordSet& rs) { return rs.records.empty(); }))
    throw Error(Errc::MissingData, "no records to score");
  Evaluation ev;
  for (const auto& rs : sets) {
    for (std::size_t e = 0; e + gap < rs.records.size(); ++e) {
      const auto& truth = rs.records[e + gap].label;
      if (!truth) throw Error(Errc::NoLabels, "unlabeled record in '" + rs.participant_id + "'", e + gap + 1);
      try {
        ev.preds.push_back(pmv::pmv_to_label(pmv::compute_pmv(pmv_input(rs.records[e])).pmv));
        ev.truths.push_back(*truth);
      } catch (const Error& err) {
        if (err.code() != Errc::InputOutOfEnvelope) throw;
        ++ev.skipped;
      }
    }
  }
  ev.report = score(ev.preds, ev.truths);
  return ev;
}

/// Scores a fitted pipeline on already prepared participant sets.
inline Evaluation evaluate(const TrainedPipeline& tp, std::span<const RecordSet> eval) {
  if (tp.kind == ModelKind::Pmv) return evaluate_pmv(eval, tp.pipeline.forecast_gap);
  require_features(eval, tp.pipeline.features);
  const auto ds = window_all(eval, tp.spec, tp.pipeline);
  Evaluation ev;
  ev.preds = predict_windows(tp, ds);
  ev.truths = ds.labels();
  ev.report = score(ev.preds, ev.truths);
  return ev;
}

/// Prepare, fit on `train`, score on `eval`.
inline Evaluation run_experiment(std::vector<RecordSet> train, std::vector<RecordSet> eval, const ExperimentConfig& cfg) {
  const auto tr = prepare_all(std::move(train), cfg.pipeline);
  const auto ev = prepare_all(std::move(eval), cfg.pipeline);
  return evaluate(fit_pipeline(tr, cfg), ev);
}

}  // namespace comfort
