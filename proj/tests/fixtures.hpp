#pragma once

#include <algorithm>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "comfort/comfort.hpp"
#include "oracles.hpp"

namespace fixture {

using comfort::ComfortRecord;
using comfort::RecordSet;
using comfort::Rng;
using comfort::ThermalLabel;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline int integer(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// A valid record with every field drawn at random, optionals included.
inline ComfortRecord random_record(Rng& rng, std::int64_t ts) {
  ComfortRecord r;
  r.timestamp = ts;
  if (integer(rng, 0, 3) > 0) {
    r.label = ThermalLabel::from_int(integer(rng, -3, 3));
    r.label_source = integer(rng, 0, 1) ? comfort::LabelSource::UserRated : comfort::LabelSource::Extrapolated;
  }
  r.age = integer(rng, 18, 70);
  r.gender = integer(rng, 0, 1) ? "F" : "M";
  r.weight = uniform(rng, 45, 120);
  r.height = uniform(rng, 150, 200);
  r.body_fat = uniform(rng, 8, 40);
  r.body_temp = uniform(rng, 35.5, 37.5);
  r.sport = integer(rng, 0, 1);
  r.meal_hours = uniform(rng, 0, 10);
  r.tiredness = integer(rng, 1, 10);
  r.clothing = uniform(rng, 0.3, 1.2);
  if (integer(rng, 0, 4)) r.radiation_temp = uniform(rng, 15, 35);
  if (integer(rng, 0, 4)) r.ambient_temp_pce = uniform(rng, 15, 35);
  r.ambient_temp_arduino = uniform(rng, 10, 38);
  r.humidity = uniform(rng, 10, 70);
  r.heart_rate = uniform(rng, 45, 150);
  r.wrist_temp = uniform(rng, 26, 37);
  r.gsr = uniform(rng, 0, 12);
  const auto& emotions = comfort::emotion_vocabulary();
  r.emotion_self = emotions[static_cast<std::size_t>(integer(rng, 0, static_cast<int>(emotions.size()) - 1))];
  if (integer(rng, 0, 1)) r.emotion_ml = emotions[static_cast<std::size_t>(integer(rng, 0, 7))];
  if (integer(rng, 0, 2) == 0) r.rgb_frame_ref = "frames/f" + std::to_string(ts) + ",a \"b\".png";
  for (auto& k : r.keypoints)
    if (integer(rng, 0, 2) == 0) k = std::to_string(integer(rng, 0, 640)) + ";" + std::to_string(integer(rng, 0, 480)) + ";0.5";
  if (integer(rng, 0, 1)) r.metabolic_rate = uniform(rng, 0.8, 2.0);
  if (integer(rng, 0, 1)) r.air_velocity = uniform(rng, 0.0, 1.0);
  if (integer(rng, 0, 1)) r.solar_radiation_ibp = uniform(rng, 0.0, 1.0);
  return r;
}

inline RecordSet random_set(Rng& rng, std::size_t n, const std::string& id = "P01") {
  RecordSet rs;
  rs.participant_id = id;
  std::int64_t ts = 1'700'000'000'000;
  for (std::size_t i = 0; i < n; ++i) {
    ts += integer(rng, 1, 3) * 33;
    rs.records.push_back(random_record(rng, ts));
  }
  return rs;
}

/// Sensors drawn from normals, with rare planted spikes so that the filter
/// has something to remove.
inline RecordSet noisy_set(Rng& rng, std::size_t n) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RecordSet rs;
  rs.participant_id = "P01";
  for (std::size_t i = 0; i < n; ++i) {
    ComfortRecord r;
    r.timestamp = static_cast<std::int64_t>(i) * 33;
    const int label = std::uniform_int_distribution<int>(-3, 3)(rng);
    if (u(rng) < 0.9) r.label = ThermalLabel::from_int(label);
    const double base = 24.0 + 2.0 * label;
    auto spike = [&](double scale) { return u(rng) < 0.01 ? scale * (u(rng) < 0.5 ? -6.0 : 6.0) : 0.0; };
    if (u(rng) < 0.95) r.ambient_temp_pce = base + 0.8 * z(rng) + spike(0.8);
    if (u(rng) < 0.95) r.radiation_temp = base + 0.5 + z(rng) + spike(1.0);
    r.ambient_temp_arduino = base + 1.0 + 0.9 * z(rng) + spike(0.9);
    r.humidity = std::clamp(35 + 5 * z(rng) + spike(5), 0.0, 100.0);
    r.heart_rate = 80 + 8 * z(rng) + spike(8);
    r.wrist_temp = 33 + z(rng) + spike(1);
    r.gsr = std::max(0.0, 1.5 + 0.5 * z(rng) + spike(0.5));
    rs.records.push_back(r);
  }
  return rs;
}

/// Plain record with the given ambient temperature and label; other sensors
/// fixed.
inline ComfortRecord simple_record(std::int64_t ts, double ambient, int label) {
  ComfortRecord r;
  r.timestamp = ts;
  r.label = ThermalLabel::from_int(label);
  r.label_source = comfort::LabelSource::UserRated;
  r.ambient_temp_pce = ambient;
  r.radiation_temp = ambient;
  r.ambient_temp_arduino = ambient + 1.0;
  return r;
}

/// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("comfort-" + tag + "-" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

/// Session input as a client would send it: duplicate sample timestamps,
/// labels and emotions at arbitrary times, some before the first sample.
inline oracle::RawStreams random_streams(Rng& rng, std::size_t n) {
  oracle::RawStreams raw;
  raw.demographics.age = integer(rng, 18, 60);
  raw.demographics.gender = integer(rng, 0, 1) ? "M" : "F";
  raw.demographics.tiredness = integer(rng, 1, 10);
  raw.demographics.clothing = uniform(rng, 0.3, 1.0);
  std::int64_t ts = 1'000'000;
  for (std::size_t i = 0; i < n; ++i) {
    ts += integer(rng, 0, 2) * 50;
    raw.samples.push_back(random_record(rng, ts));
  }
  const auto& emotions = comfort::emotion_vocabulary();
  const int labels = integer(rng, 1, 6);
  for (int k = 0; k < labels; ++k)
    raw.labels.emplace_back(integer(rng, 999'900, static_cast<int>(ts) + 100), integer(rng, -3, 3));
  const int reports = integer(rng, 0, 3);
  for (int k = 0; k < reports; ++k)
    raw.emotions.emplace_back(integer(rng, 999'900, static_cast<int>(ts) + 100),
                              emotions[static_cast<std::size_t>(integer(rng, 0, 7))]);
  return raw;
}

/// Short indoor cohort: ramp 18.4 -> 32 -> 18.4 degC at 1 degC/min, 3 Hz.
inline std::vector<RecordSet> small_cohort(std::size_t n, std::uint64_t seed = 7) {
  comfort::sim::ProfileConfig cfg;
  cfg.duration_min = 30;
  cfg.rate = 1.0;
  cfg.sample_rate_hz = 3;
  return comfort::sim::make_cohort(n, cfg, seed);
}

}  // namespace fixture
