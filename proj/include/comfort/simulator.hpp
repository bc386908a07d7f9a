#pragma once

// Synthetic climate-chamber and vehicle sessions. Labels depend only on the
// ambient temperature, the sign of its slope and per-subject comfort
// parameters, so they can be re-derived exactly from a stored series.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "comfort/error.hpp"
#include "comfort/labels.hpp"
#include "comfort/parallel.hpp"
#include "comfort/preprocess.hpp"
#include "comfort/record.hpp"
#include "comfort/rng.hpp"

namespace comfort::sim {

enum class VehicleEvent { ACOff, MaxHeat, MaxCool, WindowOpen };

inline std::string_view to_string(VehicleEvent e) {
  switch (e) {
    case VehicleEvent::ACOff: return "ACOff";
    case VehicleEvent::MaxHeat: return "MaxHeat";
    case VehicleEvent::MaxCool: return "MaxCool";
    case VehicleEvent::WindowOpen: return "WindowOpen";
  }
  return "?";
}

inline VehicleEvent vehicle_event_from_string(std::string_view s) {
  for (auto e : {VehicleEvent::ACOff, VehicleEvent::MaxHeat, VehicleEvent::MaxCool, VehicleEvent::WindowOpen})
    if (to_string(e) == s) return e;
  throw Error(Errc::UnknownCategory, "vehicle event '" + std::string(s) + "'");
}

struct TimedEvent {
  double minute = 0.0;
  VehicleEvent kind = VehicleEvent::ACOff;

  friend bool operator==(const TimedEvent&, const TimedEvent&) = default;
};

struct ProfileConfig {
  double duration_min = 60.0;
  double t_min = 18.4;  // degC
  double t_max = 32.0;  // degC
  double rate = 0.45;   // degC per minute
  Scenario scenario = Scenario::Indoor;
  std::vector<TimedEvent> vehicle_events;
  // vehicle only
  double outdoor_temp = 10.0;
  double heat_setpoint = 28.0;
  double cool_setpoint = 16.0;
  double sample_rate_hz = 30.0;

  /// Throws InfeasibleProfile.
  void validate() const {
    auto fail = [](const std::string& what) { throw Error(Errc::InfeasibleProfile, what); };
    if (!(duration_min > 0)) fail("duration must be > 0");
    if (!(t_min < t_max)) fail("t_min must be below t_max");
    if (!(rate > 0) || !std::isfinite(rate)) fail("rate must be > 0");
    if (!(sample_rate_hz > 0)) fail("sample rate must be > 0");
    if (scenario == Scenario::Indoor && rate * duration_min < t_max - t_min)
      fail("rate " + std::to_string(rate) + " cannot reach t_max within the duration");
    for (const auto& e : vehicle_events)
      if (e.minute < 0 || e.minute > duration_min) fail("vehicle event outside the recording");
  }

  std::size_t samples() const {
    return static_cast<std::size_t>(std::llround(duration_min * 60.0 * sample_rate_hz));
  }
};

inline double peak_minute(const ProfileConfig& cfg) { return (cfg.t_max - cfg.t_min) / cfg.rate; }

inline constexpr double kHvacTauSeconds = 240.0;
inline constexpr double kWindowTauSeconds = 60.0;
inline constexpr double kWindowStepFraction = 0.3;
inline constexpr double kCabinStartAboveOutdoor = 4.0;

/// Ambient temperature at every sample.
inline std::vector<double> make_profile(const ProfileConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.samples();
  const double dt = 1.0 / cfg.sample_rate_hz;
  std::vector<double> out(n);
  if (cfg.scenario == Scenario::Indoor) {
    const double tp = peak_minute(cfg);
    for (std::size_t i = 0; i < n; ++i) {
      const double minute = static_cast<double>(i) * dt / 60.0;
      const double t = minute <= tp ? cfg.t_min + cfg.rate * minute : cfg.t_max - cfg.rate * (minute - tp);
      out[i] = std::clamp(t, cfg.t_min, cfg.t_max);
    }
    return out;
  }

  auto events = cfg.vehicle_events;
  std::stable_sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.minute < b.minute; });
  double temp = cfg.outdoor_temp + kCabinStartAboveOutdoor;
  double setpoint = cfg.outdoor_temp;
  double tau = kHvacTauSeconds;
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double minute = static_cast<double>(i) * dt / 60.0;
    while (next < events.size() && events[next].minute <= minute) {
      switch (events[next].kind) {
        case VehicleEvent::ACOff: setpoint = cfg.outdoor_temp; tau = kHvacTauSeconds; break;
        case VehicleEvent::MaxHeat: setpoint = cfg.heat_setpoint; tau = kHvacTauSeconds; break;
        case VehicleEvent::MaxCool: setpoint = cfg.cool_setpoint; tau = kHvacTauSeconds; break;
        case VehicleEvent::WindowOpen:
          if (temp > cfg.outdoor_temp) temp -= kWindowStepFraction * (temp - cfg.outdoor_temp);
          setpoint = cfg.outdoor_temp;
          tau = kWindowTauSeconds;
          break;
      }
      ++next;
    }
    if (i > 0) temp += (setpoint - temp) * (1.0 - std::exp(-dt / tau));
    out[i] = temp;
  }
  return out;
}

/// Four conditions in random order after an initial heating phase.
inline std::vector<TimedEvent> random_vehicle_events(double duration_min, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<VehicleEvent> kinds = {VehicleEvent::ACOff, VehicleEvent::MaxCool, VehicleEvent::WindowOpen,
                                     VehicleEvent::MaxHeat};
  std::shuffle(kinds.begin(), kinds.end(), rng);
  std::vector<TimedEvent> events = {{0.0, VehicleEvent::MaxHeat}};
  const double segment = duration_min / 5.0;
  for (std::size_t k = 0; k < kinds.size(); ++k) events.push_back({segment * static_cast<double>(k + 1), kinds[k]});
  return events;
}

struct SensorNoise {
  double arduino = 0.6;
  double humidity = 5.0;
  double heart_rate = 10.0;
  double wrist = 0.15;
  double gsr = 0.6;  // log scale
  double solar = 0.04;
};

struct SubjectProfile {
  std::string participant_id = "P01";
  double comfort_center = 24.5;  // degC
  double comfort_width = 1.6;    // degC per label step
  double hysteresis_shift = 1.0;
  double rating_interval_s = 20.0;
  std::size_t emotion_every = 5;  // every n-th prompt asks for an emotion
  Demographics demographics;
  SensorNoise noise;
  double heart_rate_base = 83.0;
  double gsr_base = 0.6;
  double humidity_base = 40.0;
  double wrist_offset = 0.0;
  double arduino_offset = 1.5;

  void validate() const {
    if (!(comfort_width > 0)) throw Error(Errc::InvalidConfig, "comfort_width must be > 0");
    if (!(hysteresis_shift > 0)) throw Error(Errc::InvalidConfig, "hysteresis_shift must be > 0");
    if (!(rating_interval_s > 0)) throw Error(Errc::InvalidConfig, "rating_interval_s must be > 0");
    if (emotion_every == 0) throw Error(Errc::InvalidConfig, "emotion_every must be > 0");
  }
};

/// +1 while heating, -1 while cooling; a flat step keeps the previous sign.
inline int slope_direction(double prev, double cur, int previous_direction) {
  if (cur > prev) return 1;
  if (cur < prev) return -1;
  return previous_direction;
}

inline ThermalLabel comfort_label(double ambient, int direction, const SubjectProfile& s) {
  const double center = direction > 0 ? s.comfort_center - s.hysteresis_shift : s.comfort_center + s.hysteresis_shift;
  const double z = std::round((ambient - center) / s.comfort_width);
  return ThermalLabel::from_int(static_cast<int>(std::clamp(z, -3.0, 3.0)));
}

/// Comfort label of every sample of an ambient series.
inline std::vector<ThermalLabel> derive_labels(std::span<const double> ambient, const SubjectProfile& s) {
  std::vector<ThermalLabel> out;
  out.reserve(ambient.size());
  int dir = 1;
  for (std::size_t i = 0; i < ambient.size(); ++i) {
    if (i > 0) dir = slope_direction(ambient[i - 1], ambient[i], dir);
    else if (ambient.size() > 1) dir = slope_direction(ambient[0], ambient[1], dir);
    out.push_back(comfort_label(ambient[i], dir, s));
  }
  return out;
}

/// The channel that drives the labels: the reference thermometer indoors,
/// the Arduino sensor in vehicles.
inline double label_ambient(const ComfortRecord& r, Scenario scenario) {
  if (scenario == Scenario::Indoor) {
    if (!r.ambient_temp_pce) throw Error(Errc::MissingData, "indoor record without ambient_temp_pce");
    return *r.ambient_temp_pce;
  }
  return r.ambient_temp_arduino;
}

inline std::string participant_name(Scenario scenario, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%02zu", scenario == Scenario::Indoor ? 'P' : 'V', index + 1);
  return buf;
}

/// Subject parameters drawn within the reported cohort ranges. Even
/// indices are female, odd male.
inline SubjectProfile make_subject(std::size_t index, Scenario scenario, std::uint64_t seed) {
  Rng rng(seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto normal = [&](double mu, double sd) { return std::normal_distribution<double>(mu, sd)(rng); };
  SubjectProfile s;
  s.participant_id = participant_name(scenario, index);
  s.comfort_center = std::clamp(normal(24.5, 0.8), 22.5, 26.5);
  s.hysteresis_shift = uniform(0.5, 1.5);
  s.comfort_width = uniform(1.3, 1.9);

  auto& d = s.demographics;
  d.gender = index % 2 == 0 ? "F" : "M";
  d.sport = false;
  d.meal_hours = std::round(uniform(0.0, 8.0) * 4.0) / 4.0;
  d.tiredness = std::uniform_int_distribution<int>(1, 5)(rng);
  d.body_fat = uniform(14.0, 34.0);
  if (scenario == Scenario::Indoor) {
    d.age = std::uniform_int_distribution<int>(20, 33)(rng);
    d.weight = uniform(53.0, 106.9);
    d.height = uniform(155.0, 198.0);
    d.body_temp = uniform(35.8, 37.2);
    d.clothing = uniform(0.45, 0.69);
    s.heart_rate_base = normal(83.0, 8.0);
    s.gsr_base = std::exp(normal(std::log(0.6), 1.1));
    s.humidity_base = uniform(36.0, 44.0);
    s.wrist_offset = normal(0.0, 1.0);
  } else {
    d.age = std::uniform_int_distribution<int>(25, 66)(rng);
    d.weight = uniform(53.0, 119.0);
    d.height = uniform(161.0, 198.0);
    d.body_temp = uniform(35.8, 36.4);
    d.clothing = uniform(0.57, 0.81);
    s.heart_rate_base = normal(78.0, 15.0);
    s.gsr_base = std::exp(normal(std::log(0.25), 1.0));
    s.humidity_base = uniform(25.0, 35.0);
    s.wrist_offset = normal(0.0, 1.5);
    s.noise.heart_rate = 15.0;
    s.noise.solar = 0.06;
  }
  return s;
}

namespace detail {

/// Stationary AR(1) noise with a correlation time in seconds.
class Ar1 {
 public:
  Ar1(double sigma, double tau_s, double dt, Rng& rng)
      : rho_(std::exp(-dt / tau_s)), sigma_(sigma), x_(std::normal_distribution<double>(0.0, sigma)(rng)) {}

  double next(Rng& rng) {
    x_ = rho_ * x_ + std::sqrt(1.0 - rho_ * rho_) * sigma_ * unit_(rng);
    return x_;
  }

 private:
  double rho_, sigma_, x_;
  std::normal_distribution<double> unit_{0.0, 1.0};
};

struct Bounds {
  double lo, hi;
  double operator()(double v) const { return std::clamp(v, lo, hi); }
};

struct ChannelBounds {
  Bounds radiation, heart_rate, wrist, gsr, pce, arduino, humidity, solar;
};

inline const ChannelBounds& channel_bounds(Scenario s) {
  static const ChannelBounds indoor{{16.9, 33.6}, {40.0, 191.99}, {27.91, 36.95}, {0.0, 16.9},
                                    {17.1, 33.7}, {17.6, 37.0},   {12.0, 55.0},   {0.16, 0.45}};
  static const ChannelBounds vehicle{{16.9, 33.6}, {37.28, 191.99}, {25.55, 36.43}, {0.01, 9.19},
                                     {17.1, 33.7}, {10.0, 35.4},    {10.0, 67.0},   {0.0, 0.88}};
  return s == Scenario::Indoor ? indoor : vehicle;
}

inline std::string pick_emotion(Rng& rng) {
  static const std::vector<std::pair<const char*, double>> weights = {
      {"Neutral", 0.70}, {"Happiness", 0.15}, {"Surprise", 0.05}, {"Sadness", 0.04},
      {"Anger", 0.02},   {"Disgust", 0.02},   {"Fear", 0.01},     {"Contempt", 0.01}};
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  for (const auto& [name, w] : weights) {
    if (u < w) return name;
    u -= w;
  }
  return "Neutral";
}

}  // namespace detail

inline constexpr std::int64_t kSimulationEpochMs = 1680000000000;  // 2023-03-28
inline constexpr double kWristTauSeconds = 120.0;
inline constexpr double kRadiationTauSeconds = 180.0;

/// One recording. Ratings are drawn every rating interval and forward
/// filled, so every record carries a label.
inline RecordSet simulate_subject(const ProfileConfig& cfg, const SubjectProfile& subj, std::uint64_t seed) {
  subj.validate();
  const auto profile = make_profile(cfg);
  const auto& bounds = detail::channel_bounds(cfg.scenario);
  const bool indoor = cfg.scenario == Scenario::Indoor;
  const double dt = 1.0 / cfg.sample_rate_hz;
  Rng rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  detail::Ar1 arduino_noise(subj.noise.arduino, 60.0, dt, rng);
  detail::Ar1 humidity_noise(subj.noise.humidity, 300.0, dt, rng);
  detail::Ar1 hr_noise(subj.noise.heart_rate, 30.0, dt, rng);
  detail::Ar1 gsr_noise(subj.noise.gsr, 60.0, dt, rng);
  detail::Ar1 solar_noise(subj.noise.solar, 120.0, dt, rng);

  RecordSet rs;
  rs.participant_id = subj.participant_id;
  rs.scenario = cfg.scenario;
  rs.nominal_rate_hz = cfg.sample_rate_hz;
  rs.records.resize(profile.size());

  // Stored ambient values drive the labels.
  std::vector<double> ambient(profile.size());
  for (std::size_t i = 0; i < profile.size(); ++i)
    ambient[i] = indoor ? bounds.pce(profile[i]) : bounds.arduino(profile[i]);
  const auto labels = derive_labels(ambient, subj);

  const std::size_t per_rating = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(subj.rating_interval_s * cfg.sample_rate_hz)));
  const std::size_t per_second = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.sample_rate_hz)));
  const double wrist_alpha = 1.0 - std::exp(-dt / kWristTauSeconds);
  const double radiation_alpha = 1.0 - std::exp(-dt / kRadiationTauSeconds);
  const double wrist_mean = indoor ? 33.82 : 30.89;
  const double wrist_gain = indoor ? 0.35 : 0.4;
  const double wrist_pivot = indoor ? 25.3 : 20.0;
  double wrist = wrist_mean + subj.wrist_offset + wrist_gain * (profile[0] - wrist_pivot);
  double radiation = profile[0];
  std::string emotion = "Neutral";
  std::size_t prompts = 0;
  std::array<std::array<double, 3>, kKeypoints> pose{};
  for (auto& p : pose)
    for (auto& c : p) c = std::uniform_real_distribution<double>(0.2, 0.8)(rng);

  for (std::size_t i = 0; i < profile.size(); ++i) {
    auto& r = rs.records[i];
    const double t = profile[i];
    r.timestamp = kSimulationEpochMs + std::llround(static_cast<double>(i) * 1000.0 / cfg.sample_rate_hz);
    subj.demographics.apply_to(r);

    if (i > 0 && i % per_rating == 0) {
      ++prompts;
      r.label = labels[i];
      r.label_source = LabelSource::UserRated;
      if (prompts % subj.emotion_every == 0) emotion = detail::pick_emotion(rng);
    }
    r.emotion_self = emotion;

    wrist += wrist_alpha * (wrist_mean + subj.wrist_offset + wrist_gain * (t - wrist_pivot) - wrist);
    radiation += radiation_alpha * (t - radiation);
    r.wrist_temp = bounds.wrist(wrist + subj.noise.wrist * unit(rng));
    r.heart_rate = bounds.heart_rate(subj.heart_rate_base + hr_noise.next(rng));
    r.gsr = bounds.gsr(subj.gsr_base * std::exp(gsr_noise.next(rng)));
    r.solar_radiation_ibp = bounds.solar((indoor ? 0.28 : 0.46) + solar_noise.next(rng));
    if (indoor) {
      r.ambient_temp_pce = ambient[i];
      r.radiation_temp = bounds.radiation(radiation + 0.2);
      r.ambient_temp_arduino = bounds.arduino(t + subj.arduino_offset + arduino_noise.next(rng));
      r.humidity = bounds.humidity(subj.humidity_base - 1.3 * (t - 18.4) + humidity_noise.next(rng));
      r.metabolic_rate = 1.1;
      r.air_velocity = 0.1;
      if (i % per_second == 0) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "frames/%s/%06zu.jpg", subj.participant_id.c_str(), i / per_second);
        r.rgb_frame_ref = buf;
        for (std::size_t k = 0; k < kKeypoints; ++k) {
          std::snprintf(buf, sizeof buf, "%.2f;%.2f;%.2f", pose[k][0] + 0.01 * unit(rng), pose[k][1] + 0.01 * unit(rng),
                        pose[k][2] + 0.01 * unit(rng));
          r.keypoints[k] = buf;
        }
      }
    } else {
      r.ambient_temp_arduino = ambient[i];
      r.humidity = bounds.humidity(subj.humidity_base - 1.0 * (t - 20.0) + humidity_noise.next(rng));
      r.metabolic_rate = 1.2;
    }
  }
  return extrapolate_labels(std::move(rs));
}

/// Deterministic cohort; subject i draws its parameters, events and sensor
/// noise from streams derived from (seed, i).
inline std::vector<RecordSet> make_cohort(std::size_t n, const ProfileConfig& cfg, std::uint64_t seed,
                                          std::vector<SubjectProfile>* profiles = nullptr) {
  if (n < 1) throw Error(Errc::InvalidConfig, "cohort needs at least one subject");
  cfg.validate();
  std::vector<RecordSet> out(n);
  std::vector<SubjectProfile> subjects(n);
  parallel_for(n, [&](std::size_t i) {
    const auto base = derive_seed(seed, static_cast<std::uint64_t>(i));
    subjects[i] = make_subject(i, cfg.scenario, derive_seed(base, "profile"));
    auto subject_cfg = cfg;
    if (cfg.scenario == Scenario::Vehicle && cfg.vehicle_events.empty())
      subject_cfg.vehicle_events = random_vehicle_events(cfg.duration_min, derive_seed(base, "events"));
    out[i] = simulate_subject(subject_cfg, subjects[i], derive_seed(base, "sensors"));
  });
  if (profiles) *profiles = std::move(subjects);
  return out;
}

}  // namespace comfort::sim
