#pragma once

// JSON form of every configuration struct. Readers start from the current
// values, override the keys present and reject unknown keys.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "comfort/error.hpp"
#include "comfort/evalbench.hpp"
#include "comfort/pipeline.hpp"
#include "comfort/simulator.hpp"

namespace comfort {

using nlohmann::json;

namespace config_detail {

inline void check_keys(const json& j, std::initializer_list<std::string_view> known, std::string_view section) {
  if (!j.is_object()) throw Error(Errc::InvalidConfig, "'" + std::string(section) + "' must be an object");
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw Error(Errc::InvalidConfig, "unknown key '" + key + "' in '" + std::string(section) + "'");
}

template <class T>
void read(const json& j, const char* key, T& out, std::string_view section) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(Errc::InvalidConfig, "'" + std::string(section) + "." + key + "' has the wrong type");
  }
}

}  // namespace config_detail

inline json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"lr_decay", c.lr_decay},
          {"batch_size", c.batch_size},
          {"max_epochs", c.max_epochs},
          {"dropout", c.dropout},
          {"hidden_size", c.hidden_size},
          {"num_layers", c.num_layers},
          {"seed", c.seed},
          {"early_stop_patience", c.early_stop_patience},
          {"optimizer", c.optimizer == Optimizer::Adam ? "adam" : "sgd"}};
}

inline void read_into(const json& j, TrainConfig& c) {
  using config_detail::read;
  constexpr std::string_view s = "lstm";
  config_detail::check_keys(j, {"learning_rate", "lr_decay", "batch_size", "max_epochs", "dropout", "hidden_size",
                                "num_layers", "seed", "early_stop_patience", "optimizer"},
                            s);
  read(j, "learning_rate", c.learning_rate, s);
  read(j, "lr_decay", c.lr_decay, s);
  read(j, "batch_size", c.batch_size, s);
  read(j, "max_epochs", c.max_epochs, s);
  read(j, "dropout", c.dropout, s);
  read(j, "hidden_size", c.hidden_size, s);
  read(j, "num_layers", c.num_layers, s);
  read(j, "seed", c.seed, s);
  read(j, "early_stop_patience", c.early_stop_patience, s);
  if (j.contains("optimizer")) {
    std::string o;
    read(j, "optimizer", o, s);
    if (o == "adam") c.optimizer = Optimizer::Adam;
    else if (o == "sgd") c.optimizer = Optimizer::Sgd;
    else throw Error(Errc::InvalidConfig, "optimizer must be 'adam' or 'sgd'");
  }
  c.validate();
}

inline json to_json(const ForestConfig& c) {
  return {{"trees", c.trees}, {"max_depth", c.max_depth}, {"max_features", c.max_features}, {"seed", c.seed}};
}

inline void read_into(const json& j, ForestConfig& c) {
  using config_detail::read;
  constexpr std::string_view s = "forest";
  config_detail::check_keys(j, {"trees", "max_depth", "max_features", "seed", "threads"}, s);
  read(j, "trees", c.trees, s);
  read(j, "max_depth", c.max_depth, s);
  read(j, "max_features", c.max_features, s);
  read(j, "seed", c.seed, s);
  read(j, "threads", c.threads, s);
  c.validate();
}

inline json to_json(const PipelineConfig& c) {
  return {{"features", c.features},
          {"window_len", c.window_len},
          {"downsample_stride", c.downsample_stride},
          {"forecast_gap", c.forecast_gap},
          {"filter_outliers", c.filter_outliers},
          {"augment_mu", c.augment_mu},
          {"augment_sigma", c.augment_sigma},
          {"seed", c.seed}};
}

inline void read_into(const json& j, PipelineConfig& c) {
  using config_detail::read;
  constexpr std::string_view s = "pipeline";
  config_detail::check_keys(j, {"features", "window_len", "downsample_stride", "forecast_gap", "filter_outliers",
                                "augment_mu", "augment_sigma", "seed"},
                            s);
  read(j, "features", c.features, s);
  read(j, "window_len", c.window_len, s);
  read(j, "downsample_stride", c.downsample_stride, s);
  read(j, "forecast_gap", c.forecast_gap, s);
  read(j, "filter_outliers", c.filter_outliers, s);
  read(j, "augment_mu", c.augment_mu, s);
  read(j, "augment_sigma", c.augment_sigma, s);
  read(j, "seed", c.seed, s);
  c.validate();
}

inline json to_json(const sim::ProfileConfig& c) {
  json events = json::array();
  for (const auto& e : c.vehicle_events) events.push_back({{"minute", e.minute}, {"kind", sim::to_string(e.kind)}});
  return {{"duration_min", c.duration_min},   {"t_min", c.t_min},
          {"t_max", c.t_max},                 {"rate", c.rate},
          {"scenario", to_string(c.scenario)}, {"vehicle_events", events},
          {"outdoor_temp", c.outdoor_temp},   {"heat_setpoint", c.heat_setpoint},
          {"cool_setpoint", c.cool_setpoint}, {"sample_rate_hz", c.sample_rate_hz}};
}

inline void read_into(const json& j, sim::ProfileConfig& c) {
  using config_detail::read;
  constexpr std::string_view s = "profile";
  config_detail::check_keys(j, {"duration_min", "t_min", "t_max", "rate", "scenario", "vehicle_events", "outdoor_temp",
                                "heat_setpoint", "cool_setpoint", "sample_rate_hz"},
                            s);
  read(j, "duration_min", c.duration_min, s);
  read(j, "t_min", c.t_min, s);
  read(j, "t_max", c.t_max, s);
  read(j, "rate", c.rate, s);
  read(j, "outdoor_temp", c.outdoor_temp, s);
  read(j, "heat_setpoint", c.heat_setpoint, s);
  read(j, "cool_setpoint", c.cool_setpoint, s);
  read(j, "sample_rate_hz", c.sample_rate_hz, s);
  if (j.contains("scenario")) {
    std::string v;
    read(j, "scenario", v, s);
    c.scenario = scenario_from_string(v);
  }
  if (j.contains("vehicle_events")) {
    c.vehicle_events.clear();
    for (const auto& e : j.at("vehicle_events")) {
      config_detail::check_keys(e, {"minute", "kind"}, "profile.vehicle_events");
      sim::TimedEvent ev;
      read(e, "minute", ev.minute, s);
      std::string kind;
      read(e, "kind", kind, s);
      ev.kind = sim::vehicle_event_from_string(kind);
      c.vehicle_events.push_back(ev);
    }
  }
}

struct StudyConfig {
  std::size_t fold_size = 2;
  std::vector<std::string> top_features = {"ambient_temp_arduino", "humidity", "wrist_temp", "gsr", "heart_rate"};
  std::vector<std::size_t> sizes = {3, 4, 5};
};

inline json to_json(const StudyConfig& c) {
  return {{"fold_size", c.fold_size}, {"top_features", c.top_features}, {"sizes", c.sizes}};
}

inline void read_into(const json& j, StudyConfig& c) {
  using config_detail::read;
  constexpr std::string_view s = "study";
  config_detail::check_keys(j, {"fold_size", "top_features", "sizes"}, s);
  read(j, "fold_size", c.fold_size, s);
  read(j, "top_features", c.top_features, s);
  read(j, "sizes", c.sizes, s);
}

/// Everything a CLI run can be configured with.
struct RunConfig {
  ExperimentConfig experiment = ExperimentConfig::defaults_for(ModelKind::Lstm);
  sim::ProfileConfig profile;
  StudyConfig study;
  std::uint64_t seed = 42;
  std::size_t subjects = 8;
};

inline json to_json(const RunConfig& c) {
  return {{"kind", to_string(c.experiment.kind)},
          {"pipeline", to_json(c.experiment.pipeline)},
          {"lstm", to_json(c.experiment.lstm)},
          {"forest", to_json(c.experiment.forest)},
          {"validation_subjects", c.experiment.validation_subjects},
          {"profile", to_json(c.profile)},
          {"study", to_json(c.study)},
          {"seed", c.seed},
          {"subjects", c.subjects}};
}

/// The model kind is applied first so that its pipeline defaults sit under
/// any explicit pipeline keys.
inline void read_into(const json& j, RunConfig& c) {
  using config_detail::read;
  constexpr std::string_view s = "config";
  config_detail::check_keys(j, {"kind", "pipeline", "lstm", "forest", "validation_subjects", "profile", "study", "seed",
                                "subjects"},
                            s);
  if (j.contains("kind")) {
    std::string k;
    read(j, "kind", k, s);
    const auto kind = model_kind_from_string(k);
    if (kind != c.experiment.kind) {
      const auto features = c.experiment.pipeline.features;
      c.experiment.kind = kind;
      c.experiment.pipeline = PipelineConfig::defaults_for(kind);
      c.experiment.pipeline.features = features;
    }
  }
  if (j.contains("pipeline")) read_into(j.at("pipeline"), c.experiment.pipeline);
  if (j.contains("lstm")) read_into(j.at("lstm"), c.experiment.lstm);
  if (j.contains("forest")) read_into(j.at("forest"), c.experiment.forest);
  if (j.contains("profile")) read_into(j.at("profile"), c.profile);
  if (j.contains("study")) read_into(j.at("study"), c.study);
  read(j, "validation_subjects", c.experiment.validation_subjects, s);
  read(j, "seed", c.seed, s);
  read(j, "subjects", c.subjects, s);
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, path.string() + ": " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

}  // namespace comfort
