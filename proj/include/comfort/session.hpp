#pragma once

// Live logging sessions: demographics, sensor samples, timed rating prompts
// and export to the canonical record format. Every accepted write is
// appended to a per-session NDJSON journal first, so a restarted store
// replays to the same state.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "comfort/csv.hpp"
#include "comfort/error.hpp"
#include "comfort/labels.hpp"
#include "comfort/preprocess.hpp"
#include "comfort/record.hpp"

namespace comfort::session {

using nlohmann::json;

/// Epoch milliseconds.
using Clock = std::function<std::int64_t()>;

inline std::int64_t system_clock_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

enum class Status { Open, Closed };
enum class PromptKind { ThermalRating, EmotionReport };

inline std::string_view to_string(Status s) { return s == Status::Open ? "Open" : "Closed"; }
inline std::string_view to_string(PromptKind k) { return k == PromptKind::ThermalRating ? "ThermalRating" : "EmotionReport"; }

inline constexpr std::size_t kEmotionEvery = 5;

struct Prompt {
  std::int64_t due_at = 0;
  std::size_t index = 0;  // k >= 1
  PromptKind kind = PromptKind::ThermalRating;
};

/// Prompt k is due at created_at + k * interval; every fifth asks for an
/// emotion instead of a rating.
inline Prompt prompt_after(std::int64_t created_at, std::int64_t interval_ms, std::int64_t now) {
  Prompt p;
  const std::int64_t elapsed = now - created_at;
  std::int64_t k = elapsed <= 0 ? 1 : (elapsed + interval_ms - 1) / interval_ms;
  k = std::max<std::int64_t>(k, 1);
  p.index = static_cast<std::size_t>(k);
  p.due_at = created_at + k * interval_ms;
  p.kind = p.index % kEmotionEvery == 0 ? PromptKind::EmotionReport : PromptKind::ThermalRating;
  return p;
}

struct SessionState {
  std::string id;
  Demographics demographics;
  Scenario scenario = Scenario::Indoor;
  std::int64_t created_at = 0;
  double prompt_interval_s = 20.0;
  std::vector<ComfortRecord> samples;
  std::vector<std::pair<std::int64_t, ThermalLabel>> labels;
  std::vector<std::pair<std::int64_t, std::string>> emotions;
  Status status = Status::Open;

  std::int64_t interval_ms() const { return static_cast<std::int64_t>(prompt_interval_s * 1000.0); }
};

// JSON wire format. Field names follow the record columns.

inline json to_json(const Demographics& d) {
  return {{"age", d.age},
          {"gender", d.gender},
          {"weight", d.weight},
          {"height", d.height},
          {"body_fat", d.body_fat},
          {"body_temp", d.body_temp},
          {"sport", d.sport},
          {"meal_hours", d.meal_hours},
          {"tiredness", d.tiredness},
          {"clothing", d.clothing}};
}

namespace detail {

inline void reject_unknown(const json& j, std::initializer_list<std::string_view> known, Errc code) {
  if (!j.is_object()) throw Error(code, "expected a JSON object");
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) throw Error(code, "unknown field '" + key + "'");
}

template <class T>
T required(const json& j, const char* key, Errc code) {
  if (!j.contains(key)) throw Error(code, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(code, std::string("field '") + key + "' has the wrong type");
  }
}

template <class T>
std::optional<T> optional_field(const json& j, const char* key, Errc code) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return required<T>(j, key, code);
}

}  // namespace detail

inline Demographics demographics_from_json(const json& j) {
  constexpr auto code = Errc::InvalidDemographics;
  detail::reject_unknown(j, {"age", "gender", "weight", "height", "body_fat", "body_temp", "sport", "meal_hours",
                             "tiredness", "clothing"},
                         code);
  Demographics d;
  d.age = detail::required<double>(j, "age", code);
  d.gender = detail::required<std::string>(j, "gender", code);
  d.weight = detail::required<double>(j, "weight", code);
  d.height = detail::required<double>(j, "height", code);
  d.body_fat = detail::required<double>(j, "body_fat", code);
  d.body_temp = detail::required<double>(j, "body_temp", code);
  d.sport = detail::required<bool>(j, "sport", code);
  d.meal_hours = detail::required<double>(j, "meal_hours", code);
  d.tiredness = detail::required<int>(j, "tiredness", code);
  d.clothing = detail::required<double>(j, "clothing", code);
  return d;
}

inline json sample_to_json(const ComfortRecord& r) {
  json j = {{"timestamp", r.timestamp},   {"ambient_temp_arduino", r.ambient_temp_arduino},
            {"humidity", r.humidity},     {"heart_rate", r.heart_rate},
            {"wrist_temp", r.wrist_temp}, {"gsr", r.gsr}};
  auto opt = [&j](const char* key, const auto& v) {
    if (v) j[key] = *v;
  };
  opt("radiation_temp", r.radiation_temp);
  opt("ambient_temp_pce", r.ambient_temp_pce);
  opt("emotion_ml", r.emotion_ml);
  opt("rgb_frame_ref", r.rgb_frame_ref);
  for (std::size_t k = 0; k < kKeypoints; ++k) opt(("keypoint_" + std::to_string(k + 1)).c_str(), r.keypoints[k]);
  opt("metabolic_rate", r.metabolic_rate);
  opt("air_velocity", r.air_velocity);
  opt("solar_radiation_ibp", r.solar_radiation_ibp);
  return j;
}

/// Sensor sample; demographics, labels and emotion are merged at export.
inline ComfortRecord sample_from_json(const json& j) {
  constexpr auto code = Errc::MalformedRow;
  detail::reject_unknown(j, {"timestamp", "radiation_temp", "ambient_temp_pce", "ambient_temp_arduino", "humidity",
                             "heart_rate", "wrist_temp", "gsr", "emotion_ml", "rgb_frame_ref", "keypoint_1",
                             "keypoint_2", "keypoint_3", "keypoint_4", "keypoint_5", "keypoint_6", "keypoint_7",
                             "keypoint_8", "keypoint_9", "keypoint_10", "metabolic_rate", "air_velocity",
                             "solar_radiation_ibp"},
                         code);
  ComfortRecord r;
  r.timestamp = detail::required<std::int64_t>(j, "timestamp", code);
  r.ambient_temp_arduino = detail::required<double>(j, "ambient_temp_arduino", code);
  r.humidity = detail::required<double>(j, "humidity", code);
  r.heart_rate = detail::required<double>(j, "heart_rate", code);
  r.wrist_temp = detail::required<double>(j, "wrist_temp", code);
  r.gsr = detail::required<double>(j, "gsr", code);
  r.radiation_temp = detail::optional_field<double>(j, "radiation_temp", code);
  r.ambient_temp_pce = detail::optional_field<double>(j, "ambient_temp_pce", code);
  r.emotion_ml = detail::optional_field<std::string>(j, "emotion_ml", code);
  r.rgb_frame_ref = detail::optional_field<std::string>(j, "rgb_frame_ref", code);
  for (std::size_t k = 0; k < kKeypoints; ++k)
    r.keypoints[k] = detail::optional_field<std::string>(j, ("keypoint_" + std::to_string(k + 1)).c_str(), code);
  r.metabolic_rate = detail::optional_field<double>(j, "metabolic_rate", code);
  r.air_velocity = detail::optional_field<double>(j, "air_velocity", code);
  r.solar_radiation_ibp = detail::optional_field<double>(j, "solar_radiation_ibp", code);
  return r;
}

/// Merges the raw streams into a labeled RecordSet:
///  - samples sharing a timestamp collapse to the last one received,
///  - a label attaches to the latest sample at or before its timestamp
///    (the first sample if it precedes them all); later labels win,
///  - emotion reports are forward filled, Neutral before the first,
///  - demographics are copied onto every row,
///  - remaining rows are filled by extrapolate_labels.
inline RecordSet compile_session(const SessionState& s) {
  if (s.samples.empty()) throw Error(Errc::NoLabels, "session '" + s.id + "' has no samples");
  if (s.labels.empty()) throw Error(Errc::NoLabels, "session '" + s.id + "' has no labels");
  RecordSet rs;
  rs.participant_id = s.id;
  rs.scenario = s.scenario;
  for (const auto& sample : s.samples) {
    if (!rs.records.empty() && rs.records.back().timestamp == sample.timestamp) rs.records.back() = sample;
    else rs.records.push_back(sample);
  }

  auto emotions = s.emotions;
  std::stable_sort(emotions.begin(), emotions.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t next_emotion = 0;
  std::string emotion = "Neutral";
  for (auto& r : rs.records) {
    s.demographics.apply_to(r);
    while (next_emotion < emotions.size() && emotions[next_emotion].first <= r.timestamp)
      emotion = emotions[next_emotion++].second;
    r.emotion_self = emotion;
    r.label.reset();
    r.label_source = LabelSource::Extrapolated;
  }

  auto labels = s.labels;
  std::stable_sort(labels.begin(), labels.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [ts, label] : labels) {
    auto it = std::upper_bound(rs.records.begin(), rs.records.end(), ts,
                               [](std::int64_t t, const ComfortRecord& r) { return t < r.timestamp; });
    auto& target = it == rs.records.begin() ? rs.records.front() : *std::prev(it);
    target.label = label;
    target.label_source = LabelSource::UserRated;
  }
  return extrapolate_labels(std::move(rs));
}

struct StoreOptions {
  std::optional<std::filesystem::path> data_dir;  // journal directory; in-memory when absent
  Clock clock = system_clock_ms;
  double prompt_interval_s = 20.0;
};

/// Thread-safe registry of sessions. Writes to one session are serialized;
/// reads take a shared lock.
class SessionStore {
 public:
  explicit SessionStore(StoreOptions opts = {}) : opts_(std::move(opts)) {
    if (opts_.data_dir) {
      std::filesystem::create_directories(*opts_.data_dir);
      replay();
    }
  }

  std::string create_session(const Demographics& d, Scenario scenario) {
    try {
      validate(d);
    } catch (const Error& e) {
      throw Error(Errc::InvalidDemographics, e.what());
    }
    auto entry = std::make_shared<Entry>();
    entry->state.demographics = d;
    entry->state.scenario = scenario;
    entry->state.created_at = opts_.clock();
    entry->state.prompt_interval_s = opts_.prompt_interval_s;
    std::unique_lock lock(entry->mu);  // held until the create line is journaled
    {
      std::unique_lock registry(registry_mu_);
      entry->state.id = make_id(++counter_);
      sessions_[entry->state.id] = entry;
    }
    journal(*entry, {{"op", "create"},
                     {"id", entry->state.id},
                     {"demographics", to_json(d)},
                     {"scenario", to_string(scenario)},
                     {"created_at", entry->state.created_at},
                     {"prompt_interval_s", entry->state.prompt_interval_s}});
    return entry->state.id;
  }

  void ingest_sample(const std::string& id, ComfortRecord sample) {
    auto e = find(id);
    validate_record(sample);
    std::unique_lock lock(e->mu);
    require_open(e->state);
    if (!e->state.samples.empty() && sample.timestamp < e->state.samples.back().timestamp)
      throw Error(Errc::NonMonotonicTimestamp, "sample timestamp " + std::to_string(sample.timestamp) +
                                                   " precedes " + std::to_string(e->state.samples.back().timestamp));
    journal(*e, {{"op", "sample"}, {"sample", sample_to_json(sample)}});
    e->state.samples.push_back(std::move(sample));
  }

  void submit_label(const std::string& id, std::int64_t timestamp, int label) {
    auto e = find(id);
    const auto l = ThermalLabel::from_int(label);
    std::unique_lock lock(e->mu);
    require_open(e->state);
    journal(*e, {{"op", "label"}, {"timestamp", timestamp}, {"label", label}});
    e->state.labels.emplace_back(timestamp, l);
  }

  void submit_emotion(const std::string& id, std::int64_t timestamp, const std::string& emotion) {
    auto e = find(id);
    if (!in_vocabulary(emotion, emotion_vocabulary()))
      throw Error(Errc::UnknownCategory, "emotion '" + emotion + "' is not in the vocabulary");
    std::unique_lock lock(e->mu);
    require_open(e->state);
    journal(*e, {{"op", "emotion"}, {"timestamp", timestamp}, {"emotion", emotion}});
    e->state.emotions.emplace_back(timestamp, emotion);
  }

  Prompt next_prompt(const std::string& id, std::optional<std::int64_t> now = std::nullopt) const {
    auto e = find(id);
    std::shared_lock lock(e->mu);
    require_open(e->state);
    return prompt_after(e->state.created_at, e->state.interval_ms(), now ? *now : opts_.clock());
  }

  void close(const std::string& id) {
    auto e = find(id);
    std::unique_lock lock(e->mu);
    require_open(e->state);
    journal(*e, {{"op", "close"}});
    e->state.status = Status::Closed;
  }

  RecordSet export_session(const std::string& id) const {
    auto e = find(id);
    std::shared_lock lock(e->mu);
    if (e->state.status == Status::Open) throw Error(Errc::SessionOpen, "session '" + id + "' is still open");
    return compile_session(e->state);
  }

  std::string export_csv(const std::string& id) const { return to_csv_string(export_session(id)); }

  SessionState snapshot(const std::string& id) const {
    auto e = find(id);
    std::shared_lock lock(e->mu);
    return e->state;
  }

  std::vector<std::string> ids() const {
    std::shared_lock lock(registry_mu_);
    std::vector<std::string> out;
    for (const auto& [id, _] : sessions_) out.push_back(id);
    return out;
  }

 private:
  struct Entry {
    mutable std::shared_mutex mu;
    SessionState state;
  };

  static std::string make_id(std::uint64_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "S%06llu", static_cast<unsigned long long>(n));
    return buf;
  }

  std::shared_ptr<Entry> find(const std::string& id) const {
    std::shared_lock lock(registry_mu_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(Errc::UnknownSession, "no session '" + id + "'");
    return it->second;
  }

  static void require_open(const SessionState& s) {
    if (s.status != Status::Open) throw Error(Errc::SessionClosed, "session '" + s.id + "' is closed");
  }

  std::filesystem::path journal_path(const std::string& id) const { return *opts_.data_dir / (id + ".ndjson"); }

  void journal(const Entry& e, const json& line) const {
    if (!opts_.data_dir || replaying_) return;
    std::ofstream out(journal_path(e.state.id), std::ios::app | std::ios::binary);
    out << line.dump() << '\n';
    out.flush();
    if (!out) throw Error(Errc::Io, "cannot append to journal of '" + e.state.id + "'");
  }

  void replay() {
    replaying_ = true;
    std::vector<std::filesystem::path> files;
    for (const auto& f : std::filesystem::directory_iterator(*opts_.data_dir))
      if (f.path().extension() == ".ndjson") files.push_back(f.path());
    std::sort(files.begin(), files.end());
    for (const auto& path : files) replay_file(path);
    replaying_ = false;
  }

  void replay_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::string line;
    std::shared_ptr<Entry> entry;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception&) {
        throw Error(Errc::Io, path.string() + ":" + std::to_string(lineno) + " is not valid JSON");
      }
      const auto op = j.value("op", std::string());
      if (op == "create") {
        entry = std::make_shared<Entry>();
        auto& s = entry->state;
        s.id = j.at("id").get<std::string>();
        s.demographics = demographics_from_json(j.at("demographics"));
        s.scenario = scenario_from_string(j.at("scenario").get<std::string>());
        s.created_at = j.at("created_at").get<std::int64_t>();
        s.prompt_interval_s = j.at("prompt_interval_s").get<double>();
        sessions_[s.id] = entry;
        if (s.id.size() > 1) counter_ = std::max<std::uint64_t>(counter_, std::stoull(s.id.substr(1)));
        continue;
      }
      if (!entry) throw Error(Errc::Io, path.string() + " does not start with a create record");
      auto& s = entry->state;
      if (op == "sample") s.samples.push_back(sample_from_json(j.at("sample")));
      else if (op == "label") s.labels.emplace_back(j.at("timestamp").get<std::int64_t>(), ThermalLabel::from_int(j.at("label").get<int>()));
      else if (op == "emotion") s.emotions.emplace_back(j.at("timestamp").get<std::int64_t>(), j.at("emotion").get<std::string>());
      else if (op == "close") s.status = Status::Closed;
      else throw Error(Errc::Io, path.string() + ":" + std::to_string(lineno) + " has unknown op '" + op + "'");
    }
  }

  StoreOptions opts_;
  mutable std::shared_mutex registry_mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t counter_ = 0;
  bool replaying_ = false;
};

}  // namespace comfort::session
