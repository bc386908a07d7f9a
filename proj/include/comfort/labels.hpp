#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "comfort/error.hpp"

namespace comfort {

/// Thermal sensation on the 7-point scale, Cold (-3) ... Hot (+3).
class ThermalLabel {
 public:
  static constexpr int kMin = -3;
  static constexpr int kMax = 3;
  static constexpr std::size_t kClasses = 7;

  constexpr ThermalLabel() = default;

  /// Throws InvalidLabel for values outside [-3, 3].
  static ThermalLabel from_int(int v) {
    if (v < kMin || v > kMax) throw Error(Errc::InvalidLabel, "label " + std::to_string(v) + " outside [-3, 3]");
    return ThermalLabel(v);
  }
  /// Class index in [0, 7): Cold -> 0, Hot -> 6.
  static ThermalLabel from_index(std::size_t i) { return from_int(static_cast<int>(i) + kMin); }

  constexpr int value() const noexcept { return value_; }
  constexpr std::size_t index() const noexcept { return static_cast<std::size_t>(value_ - kMin); }

  friend constexpr auto operator<=>(ThermalLabel, ThermalLabel) = default;

 private:
  constexpr explicit ThermalLabel(int v) : value_(v) {}
  int value_ = 0;
};

inline constexpr std::array<std::string_view, 7> kLabelNames = {
    "Cold", "Cool", "Slightly Cool", "Comfortable", "Slightly Warm", "Warm", "Hot"};

inline std::string_view label_name(ThermalLabel l) { return kLabelNames[l.index()]; }

inline ThermalLabel label_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kLabelNames.size(); ++i)
    if (kLabelNames[i] == name) return ThermalLabel::from_index(i);
  throw Error(Errc::InvalidLabel, "unknown label name '" + std::string(name) + "'");
}

enum class Scale { SevenPoint, ThreePoint, TwoPoint };

inline constexpr std::size_t scale_classes(Scale s) noexcept {
  switch (s) {
    case Scale::SevenPoint: return 7;
    case Scale::ThreePoint: return 3;
    case Scale::TwoPoint: return 2;
  }
  return 0;
}

// Reduced class ids.
inline constexpr int kThreeCold = 0, kThreeComfortable = 1, kThreeWarm = 2;
inline constexpr int kTwoComfortable = 0, kTwoUncomfortable = 1;

/// Coarsens a 7-point label. SevenPoint returns the class index 0..6;
/// ThreePoint maps {-3..-1} -> Cold, {0} -> Comfortable, {1..3} -> Warm;
/// TwoPoint maps {-1, 0, 1} -> Comfortable and the rest to Uncomfortable.
inline constexpr int reduce_scale(ThermalLabel l, Scale s) noexcept {
  const int v = l.value();
  switch (s) {
    case Scale::SevenPoint: return static_cast<int>(l.index());
    case Scale::ThreePoint: return v < 0 ? kThreeCold : (v == 0 ? kThreeComfortable : kThreeWarm);
    case Scale::TwoPoint: return (v >= -1 && v <= 1) ? kTwoComfortable : kTwoUncomfortable;
  }
  return 0;
}

/// Cumulative binary encoding of an ordinal label; entries are real so the
/// same type carries sigmoid outputs.
using OrdinalVector = std::array<double, ThermalLabel::kClasses>;

/// bits[i] = 1 for i < label + 4.
inline OrdinalVector encode_ordinal(ThermalLabel l) {
  OrdinalVector v{};
  const std::size_t ones = l.index() + 1;
  for (std::size_t i = 0; i < ones; ++i) v[i] = 1.0;
  return v;
}

/// Length of the leading run of entries >= threshold, clamped to at least one,
/// mapped back onto [-3, 3]. Robust to non-monotone network outputs.
inline ThermalLabel decode_ordinal(const OrdinalVector& v, double threshold = 0.5) {
  std::size_t prefix = 0;
  while (prefix < v.size() && v[prefix] >= threshold) ++prefix;
  return ThermalLabel::from_int(static_cast<int>(std::max<std::size_t>(prefix, 1)) - 4);
}

// Categorical vocabularies. Order fixes one-hot indices.
inline const std::vector<std::string>& emotion_vocabulary() {
  static const std::vector<std::string> v = {"Anger",     "Fear",    "Sadness",  "Disgust",
                                             "Happiness", "Neutral", "Surprise", "Contempt"};
  return v;
}

inline const std::vector<std::string>& gender_vocabulary() {
  static const std::vector<std::string> v = {"F", "M"};
  return v;
}

inline bool in_vocabulary(std::string_view value, std::span<const std::string> vocabulary) {
  return std::find(vocabulary.begin(), vocabulary.end(), value) != vocabulary.end();
}

inline std::vector<double> one_hot(std::string_view value, std::span<const std::string> vocabulary) {
  std::vector<double> out(vocabulary.size(), 0.0);
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    if (vocabulary[i] == value) {
      out[i] = 1.0;
      return out;
    }
  }
  throw Error(Errc::UnknownCategory, "'" + std::string(value) + "' not in vocabulary");
}

}  // namespace comfort
