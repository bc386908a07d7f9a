#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "comfort/error.hpp"
#include "comfort/labels.hpp"

namespace comfort {

enum class LabelSource { UserRated, Extrapolated };
enum class Scenario { Indoor, Vehicle };

inline std::string_view to_string(LabelSource s) { return s == LabelSource::UserRated ? "UserRated" : "Extrapolated"; }
inline std::string_view to_string(Scenario s) { return s == Scenario::Indoor ? "Indoor" : "Vehicle"; }

inline Scenario scenario_from_string(std::string_view s) {
  if (s == "Indoor" || s == "indoor") return Scenario::Indoor;
  if (s == "Vehicle" || s == "vehicle") return Scenario::Vehicle;
  throw Error(Errc::UnknownCategory, "scenario '" + std::string(s) + "'");
}

inline constexpr std::size_t kKeypoints = 10;

/// One timestamped observation. Optional fields are serialized as NA.
struct ComfortRecord {
  std::int64_t timestamp = 0;  // epoch milliseconds
  std::optional<ThermalLabel> label;
  LabelSource label_source = LabelSource::Extrapolated;

  // personal context, constant within a session
  double age = 25.0;
  std::string gender = "F";
  double weight = 70.0;       // kg
  double height = 175.0;      // cm
  double body_fat = 22.0;     // percent
  double body_temp = 36.4;    // degC
  bool sport = false;
  double meal_hours = 2.0;
  int tiredness = 3;          // 1..10
  double clothing = 0.6;      // clo

  // environment and physiology
  std::optional<double> radiation_temp;    // degC, absent in vehicles
  std::optional<double> ambient_temp_pce;  // degC, absent in vehicles
  double ambient_temp_arduino = 25.0;      // degC
  double humidity = 30.0;                  // percent RH
  double heart_rate = 80.0;                // bpm
  double wrist_temp = 33.0;                // degC
  double gsr = 1.0;                        // microsiemens

  std::string emotion_self = "Neutral";
  std::optional<std::string> emotion_ml;
  std::optional<std::string> rgb_frame_ref;
  std::array<std::optional<std::string>, kKeypoints> keypoints{};  // "x;y;z"

  std::optional<double> metabolic_rate;       // met
  std::optional<double> air_velocity;         // m/s
  std::optional<double> solar_radiation_ibp;  // mean brightness per pixel

  friend bool operator==(const ComfortRecord&, const ComfortRecord&) = default;
};

struct RecordSet {
  std::string participant_id;
  Scenario scenario = Scenario::Indoor;
  std::vector<ComfortRecord> records;
  double nominal_rate_hz = 30.0;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }

  friend bool operator==(const RecordSet&, const RecordSet&) = default;
};

/// Canonical column order; the first 34 are validated, the last two are
/// extension columns.
inline const std::vector<std::string>& canonical_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c = {"timestamp",      "label",          "age",
                                  "gender",         "weight",         "height",
                                  "body_fat",       "body_temp",      "sport",
                                  "meal_hours",     "tiredness",      "clothing",
                                  "radiation_temp", "ambient_temp_pce", "ambient_temp_arduino",
                                  "humidity",       "heart_rate",     "wrist_temp",
                                  "gsr",            "emotion_self",   "emotion_ml",
                                  "rgb_frame_ref"};
    for (std::size_t i = 1; i <= kKeypoints; ++i) c.push_back("keypoint_" + std::to_string(i));
    c.push_back("metabolic_rate");
    c.push_back("air_velocity");
    return c;
  }();
  return cols;
}

inline const std::vector<std::string>& extension_columns() {
  static const std::vector<std::string> cols = {"label_source", "solar_radiation_ibp"};
  return cols;
}

inline constexpr std::size_t kCanonicalColumns = 34;

/// Continuous sensor channels screened by the outlier filter.
inline const std::vector<std::string>& sensor_channels() {
  static const std::vector<std::string> c = {"radiation_temp", "ambient_temp_pce", "ambient_temp_arduino",
                                             "humidity",       "heart_rate",       "wrist_temp",
                                             "gsr",            "solar_radiation_ibp"};
  return c;
}

inline const std::vector<std::string>& ambient_channels() {
  static const std::vector<std::string> c = {"ambient_temp_pce", "ambient_temp_arduino"};
  return c;
}

/// Numeric view of a column by name; nullopt when the value is absent.
/// Throws MissingFeature for names that are not numeric columns.
inline std::optional<double> numeric_field(const ComfortRecord& r, std::string_view name) {
  if (name == "age") return r.age;
  if (name == "weight") return r.weight;
  if (name == "height") return r.height;
  if (name == "body_fat") return r.body_fat;
  if (name == "body_temp") return r.body_temp;
  if (name == "sport") return r.sport ? 1.0 : 0.0;
  if (name == "meal_hours") return r.meal_hours;
  if (name == "tiredness") return static_cast<double>(r.tiredness);
  if (name == "clothing") return r.clothing;
  if (name == "radiation_temp") return r.radiation_temp;
  if (name == "ambient_temp_pce") return r.ambient_temp_pce;
  if (name == "ambient_temp_arduino") return r.ambient_temp_arduino;
  if (name == "humidity") return r.humidity;
  if (name == "heart_rate") return r.heart_rate;
  if (name == "wrist_temp") return r.wrist_temp;
  if (name == "gsr") return r.gsr;
  if (name == "metabolic_rate") return r.metabolic_rate;
  if (name == "air_velocity") return r.air_velocity;
  if (name == "solar_radiation_ibp") return r.solar_radiation_ibp;
  throw Error(Errc::MissingFeature, "'" + std::string(name) + "' is not a numeric column");
}

inline bool is_numeric_column(std::string_view name) {
  static const ComfortRecord probe{};
  try {
    (void)numeric_field(probe, name);
    return true;
  } catch (const Error&) {
    return false;
  }
}

/// Categorical columns usable as one-hot features, with their vocabularies.
inline const std::vector<std::string>* categorical_vocabulary(std::string_view name) {
  if (name == "gender") return &gender_vocabulary();
  if (name == "emotion_self" || name == "emotion_ml") return &emotion_vocabulary();
  return nullptr;
}

inline std::optional<std::string> categorical_field(const ComfortRecord& r, std::string_view name) {
  if (name == "gender") return r.gender;
  if (name == "emotion_self") return r.emotion_self;
  if (name == "emotion_ml") return r.emotion_ml;
  throw Error(Errc::MissingFeature, "'" + std::string(name) + "' is not a categorical column");
}

namespace detail {

inline void check_range(double v, double lo, double hi, std::string_view what, std::optional<std::size_t> row) {
  if (!std::isfinite(v) || v < lo || v > hi) {
    throw Error(Errc::OutOfBoundsValue,
                std::string(what) + "=" + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                    std::to_string(hi) + "]" + (row ? " at row " + std::to_string(*row) : ""),
                row);
  }
}

inline void check_opt(const std::optional<double>& v, double lo, double hi, std::string_view what,
                      std::optional<std::size_t> row) {
  if (v) check_range(*v, lo, hi, what, row);
}

inline bool valid_keypoint(std::string_view s) {
  int parts = 0;
  std::size_t start = 0;
  while (true) {
    const auto end = s.find(';', start);
    const auto piece = s.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    if (piece.empty()) return false;
    char* stop = nullptr;
    const std::string tmp(piece);
    (void)std::strtod(tmp.c_str(), &stop);
    if (stop != tmp.c_str() + tmp.size()) return false;
    ++parts;
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return parts == 3;
}

}  // namespace detail

/// Hard physical bounds on every field. Throws OutOfBoundsValue (or
/// UnknownCategory for vocabulary misses) naming the row when given.
inline void validate_record(const ComfortRecord& r, std::optional<std::size_t> row = std::nullopt) {
  using detail::check_opt;
  using detail::check_range;
  check_range(r.age, 0, 130, "age", row);
  check_range(r.weight, 1, 400, "weight", row);
  check_range(r.height, 30, 300, "height", row);
  check_range(r.body_fat, 0, 100, "body_fat", row);
  check_range(r.body_temp, -40, 80, "body_temp", row);
  check_range(r.meal_hours, 0, 1000, "meal_hours", row);
  check_range(r.tiredness, 1, 10, "tiredness", row);
  check_range(r.clothing, 0, 4, "clothing", row);
  check_opt(r.radiation_temp, -40, 80, "radiation_temp", row);
  check_opt(r.ambient_temp_pce, -40, 80, "ambient_temp_pce", row);
  check_range(r.ambient_temp_arduino, -40, 80, "ambient_temp_arduino", row);
  check_range(r.humidity, 0, 100, "humidity", row);
  check_range(r.heart_rate, 20, 250, "heart_rate", row);
  check_range(r.wrist_temp, -40, 80, "wrist_temp", row);
  check_range(r.gsr, 0, 100, "gsr", row);
  check_opt(r.metabolic_rate, 0.5, 5, "metabolic_rate", row);
  check_opt(r.air_velocity, 0, 50, "air_velocity", row);
  check_opt(r.solar_radiation_ibp, 0, 1, "solar_radiation_ibp", row);

  const auto where = row ? " at row " + std::to_string(*row) : std::string();
  if (!in_vocabulary(r.gender, gender_vocabulary()))
    throw Error(Errc::UnknownCategory, "gender '" + r.gender + "'" + where, row);
  if (!in_vocabulary(r.emotion_self, emotion_vocabulary()))
    throw Error(Errc::UnknownCategory, "emotion_self '" + r.emotion_self + "'" + where, row);
  if (r.emotion_ml && !in_vocabulary(*r.emotion_ml, emotion_vocabulary()))
    throw Error(Errc::UnknownCategory, "emotion_ml '" + *r.emotion_ml + "'" + where, row);
  for (std::size_t k = 0; k < kKeypoints; ++k) {
    if (r.keypoints[k] && !detail::valid_keypoint(*r.keypoints[k]))
      throw Error(Errc::MalformedRow, "keypoint_" + std::to_string(k + 1) + " is not 'x;y;z'" + where, row);
  }
}

/// Self-reported personal context, constant within a session.
struct Demographics {
  double age = 25.0;
  std::string gender = "F";
  double weight = 70.0;
  double height = 175.0;
  double body_fat = 22.0;
  double body_temp = 36.4;
  bool sport = false;
  double meal_hours = 2.0;
  int tiredness = 3;
  double clothing = 0.6;

  void apply_to(ComfortRecord& r) const {
    r.age = age;
    r.gender = gender;
    r.weight = weight;
    r.height = height;
    r.body_fat = body_fat;
    r.body_temp = body_temp;
    r.sport = sport;
    r.meal_hours = meal_hours;
    r.tiredness = tiredness;
    r.clothing = clothing;
  }

  friend bool operator==(const Demographics&, const Demographics&) = default;
};

/// Same bounds as validate_record.
inline void validate(const Demographics& d) {
  ComfortRecord probe;
  d.apply_to(probe);
  validate_record(probe);
}

/// Strictly increasing timestamps; reports the 1-based offending row.
inline void validate_timestamps(const RecordSet& rs) {
  for (std::size_t i = 1; i < rs.records.size(); ++i) {
    if (rs.records[i].timestamp <= rs.records[i - 1].timestamp) {
      throw Error(Errc::NonMonotonicTimestamp,
                  "timestamp " + std::to_string(rs.records[i].timestamp) + " at row " + std::to_string(i + 1) +
                      " does not exceed its predecessor",
                  i + 1);
    }
  }
}

inline void validate(const RecordSet& rs) {
  for (std::size_t i = 0; i < rs.records.size(); ++i) validate_record(rs.records[i], i + 1);
  validate_timestamps(rs);
}

}  // namespace comfort
