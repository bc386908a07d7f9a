#pragma once

// Versioned JSON model files: pipeline settings, fitted normalization
// statistics and the model parameters with their shapes.

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "comfort/config.hpp"
#include "comfort/error.hpp"
#include "comfort/forest.hpp"
#include "comfort/lstm.hpp"
#include "comfort/pipeline.hpp"

namespace comfort {

inline constexpr std::string_view kModelFormat = "comfortkit-model";
inline constexpr int kModelVersion = 1;

namespace model_io_detail {

inline json tensor(const Mat& m) {
  return {{"shape", {m.rows(), m.cols()}}, {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

inline json tensor(const Vec& v) {
  return {{"shape", {v.size()}}, {"data", std::vector<double>(v.data(), v.data() + v.size())}};
}

inline Mat read_matrix(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& name) {
  const auto shape = j.at("shape").get<std::vector<Eigen::Index>>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (shape.size() != 2 || shape[0] != rows || shape[1] != cols || static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw Error(Errc::ShapeMismatch, "tensor '" + name + "' has an unexpected shape");
  return Eigen::Map<const Mat>(data.data(), rows, cols);
}

inline Vec read_vector(const json& j, Eigen::Index size, const std::string& name) {
  const auto shape = j.at("shape").get<std::vector<Eigen::Index>>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (shape.size() != 1 || shape[0] != size || static_cast<Eigen::Index>(data.size()) != size)
    throw Error(Errc::ShapeMismatch, "tensor '" + name + "' has an unexpected shape");
  return Eigen::Map<const Vec>(data.data(), size);
}

}  // namespace model_io_detail

inline json lstm_to_json(const LstmModel& m) {
  using model_io_detail::tensor;
  json layers = json::array();
  for (const auto& l : m.params.layers)
    layers.push_back({{"w_input", tensor(l.w_input)}, {"w_hidden", tensor(l.w_hidden)}, {"bias", tensor(l.bias)}});
  return {{"input_size", m.input_size},
          {"hidden_size", m.hidden_size},
          {"num_layers", m.num_layers},
          {"dropout_p", m.dropout_p},
          {"layers", layers},
          {"decoder", {{"weight", tensor(m.params.w_decoder)}, {"bias", tensor(m.params.b_decoder)}}}};
}

inline LstmModel lstm_from_json(const json& j) {
  using namespace model_io_detail;
  LstmModel m;
  m.input_size = j.at("input_size").get<std::size_t>();
  m.hidden_size = j.at("hidden_size").get<std::size_t>();
  m.num_layers = j.at("num_layers").get<std::size_t>();
  m.dropout_p = j.at("dropout_p").get<double>();
  const auto H = static_cast<Eigen::Index>(m.hidden_size);
  const auto& layers = j.at("layers");
  if (layers.size() != m.num_layers) throw Error(Errc::ShapeMismatch, "layer count does not match num_layers");
  for (std::size_t l = 0; l < m.num_layers; ++l) {
    const auto in = static_cast<Eigen::Index>(l == 0 ? m.input_size : m.hidden_size);
    const auto tag = "layer" + std::to_string(l);
    m.params.layers.push_back({read_matrix(layers[l].at("w_input"), 4 * H, in, tag + ".w_input"),
                               read_matrix(layers[l].at("w_hidden"), 4 * H, H, tag + ".w_hidden"),
                               read_vector(layers[l].at("bias"), 4 * H, tag + ".bias")});
  }
  const auto out = static_cast<Eigen::Index>(kOrdinalOutputs);
  m.params.w_decoder = read_matrix(j.at("decoder").at("weight"), out, H, "decoder.weight");
  m.params.b_decoder = read_vector(j.at("decoder").at("bias"), out, "decoder.bias");
  m.trained = true;
  return m;
}

/// Nodes are stored as [feature, threshold, left, right, depth, decrease,
/// histogram...].
inline json forest_to_json(const ForestModel& m) {
  json trees = json::array();
  for (const auto& t : m.trees) {
    json nodes = json::array();
    for (const auto& n : t.nodes) {
      json row = {n.feature, n.threshold, n.left, n.right, n.depth, n.weighted_decrease};
      for (auto c : n.histogram) row.push_back(c);
      nodes.push_back(std::move(row));
    }
    trees.push_back(std::move(nodes));
  }
  return {{"config", to_json(m.config)}, {"n_features", m.n_features}, {"feature_names", m.feature_names}, {"trees", trees}};
}

inline ForestModel forest_from_json(const json& j) {
  ForestModel m;
  read_into(j.at("config"), m.config);
  m.n_features = j.at("n_features").get<std::size_t>();
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  for (const auto& jt : j.at("trees")) {
    Tree t;
    for (const auto& row : jt) {
      if (row.size() != 6 + 7) throw Error(Errc::ShapeMismatch, "forest node has the wrong width");
      TreeNode n;
      n.feature = row[0].get<int>();
      n.threshold = row[1].get<double>();
      n.left = row[2].get<std::int32_t>();
      n.right = row[3].get<std::int32_t>();
      n.depth = row[4].get<std::uint32_t>();
      n.weighted_decrease = row[5].get<double>();
      for (std::size_t c = 0; c < 7; ++c) n.histogram[c] = row[6 + c].get<std::size_t>();
      if (n.feature >= static_cast<int>(m.n_features)) throw Error(Errc::ShapeMismatch, "split on an unknown feature");
      t.nodes.push_back(n);
    }
    const auto count = static_cast<std::int32_t>(t.nodes.size());
    for (const auto& n : t.nodes)
      if (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count))
        throw Error(Errc::ShapeMismatch, "forest node points outside its tree");
    m.trees.push_back(std::move(t));
  }
  m.trained = true;
  return m;
}

inline json feature_spec_to_json(const FeatureSpec& spec) {
  json channels = json::array();
  if (spec.stats)
    for (const auto& c : spec.stats->channels)
      channels.push_back({{"name", c.name},
                          {"column", c.column},
                          {"one_hot", c.one_hot},
                          {"category", c.category},
                          {"mean", c.mean},
                          {"std", c.std}});
  return {{"selected", spec.selected}, {"dropped", spec.dropped}, {"channels", channels}};
}

inline FeatureSpec feature_spec_from_json(const json& j) {
  FeatureSpec spec;
  spec.selected = j.at("selected").get<std::vector<std::string>>();
  spec.dropped = j.at("dropped").get<std::vector<std::string>>();
  auto stats = std::make_shared<NormalizationStats>();
  for (const auto& c : j.at("channels"))
    stats->channels.push_back({c.at("name").get<std::string>(), c.at("column").get<std::string>(),
                               c.at("one_hot").get<bool>(), c.at("category").get<std::string>(),
                               c.at("mean").get<double>(), c.at("std").get<double>()});
  spec.stats = std::move(stats);
  return spec;
}

inline json history_to_json(const std::vector<EpochStats>& history) {
  json out = json::array();
  for (const auto& e : history) {
    json row = {{"epoch", e.epoch}, {"learning_rate", e.learning_rate}, {"train_loss", e.train_loss}};
    row["val_loss"] = e.val_loss ? json(*e.val_loss) : json(nullptr);
    row["val_kappa7"] = e.val_kappa7 ? json(*e.val_kappa7) : json(nullptr);
    out.push_back(std::move(row));
  }
  return out;
}

inline json pipeline_to_json(const TrainedPipeline& tp) {
  json j = {{"format", kModelFormat},
            {"version", kModelVersion},
            {"kind", to_string(tp.kind)},
            {"pipeline", to_json(tp.pipeline)},
            {"features", feature_spec_to_json(tp.spec)}};
  if (tp.lstm) j["lstm"] = lstm_to_json(*tp.lstm);
  if (tp.forest) j["forest"] = forest_to_json(*tp.forest);
  if (tp.mode) j["mode"] = tp.mode->value();
  return j;
}

inline TrainedPipeline pipeline_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kModelFormat) throw Error(Errc::InvalidConfig, "not a model file");
    if (j.at("version").get<int>() != kModelVersion)
      throw Error(Errc::InvalidConfig, "unsupported model version " + std::to_string(j.at("version").get<int>()));
    TrainedPipeline tp;
    tp.kind = model_kind_from_string(j.at("kind").get<std::string>());
    tp.pipeline = PipelineConfig::defaults_for(tp.kind);
    read_into(j.at("pipeline"), tp.pipeline);
    tp.spec = feature_spec_from_json(j.at("features"));
    if (j.contains("lstm")) tp.lstm = lstm_from_json(j.at("lstm"));
    if (j.contains("forest")) tp.forest = forest_from_json(j.at("forest"));
    if (j.contains("mode")) tp.mode = ThermalLabel::from_int(j.at("mode").get<int>());
    if (tp.lstm && tp.lstm->input_size != tp.spec.n_channels())
      throw Error(Errc::ShapeMismatch, "LSTM input size does not match the feature channels");
    if (tp.forest && tp.forest->n_features != tp.spec.n_channels() * tp.pipeline.window_len)
      throw Error(Errc::ShapeMismatch, "forest width does not match the feature channels");
    return tp;
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, std::string("malformed model file: ") + e.what());
  }
}

inline void save_model(const TrainedPipeline& tp, const std::filesystem::path& path) {
  write_json_file(path, pipeline_to_json(tp));
}

inline TrainedPipeline load_model(const std::filesystem::path& path) { return pipeline_from_json(read_json_file(path)); }

}  // namespace comfort
