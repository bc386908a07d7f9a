#pragma once

// Fanger's Predicted Mean Vote from the steady-state heat balance of the
// human body, following ISO 7730 / ASHRAE 55 definitions.

#include <algorithm>
#include <cmath>
#include <string>

#include "comfort/error.hpp"
#include "comfort/labels.hpp"

namespace comfort::pmv {

struct PmvInput {
  double ambient_temp = 25.0;    // degC
  double radiation_temp = 25.0;  // degC, mean radiant
  double air_velocity = 0.1;     // m/s
  double rel_humidity = 50.0;    // percent
  double metabolic_rate = 1.1;   // met
  double clothing = 0.6;         // clo
};

struct PmvResult {
  double pmv = 0.0;
  int iterations = 0;
  bool converged = false;
  double clothing_surface_temp = 0.0;  // degC
};

inline constexpr double kMetToWm2 = 58.15;
inline constexpr double kCloToM2KW = 0.155;
inline constexpr double kTolerance = 1e-9;  // degC, residual of the clothing surface temperature
inline constexpr int kMaxIterations = 150;
inline constexpr double kDamping = 0.5;
inline constexpr double kReportClamp = 3.5;

/// Validated envelope of the engine.
inline void check_envelope(const PmvInput& in) {
  auto check = [](double v, double lo, double hi, const char* what) {
    if (!std::isfinite(v) || v < lo || v > hi)
      throw Error(Errc::InputOutOfEnvelope, std::string(what) + "=" + std::to_string(v) + " outside [" +
                                                std::to_string(lo) + ", " + std::to_string(hi) + "]");
  };
  check(in.ambient_temp, 10, 40, "ambient_temp");
  check(in.radiation_temp, 10, 40, "radiation_temp");
  check(in.air_velocity, 0, 2, "air_velocity");
  check(in.rel_humidity, 0, 100, "rel_humidity");
  check(in.metabolic_rate, 0.8, 4, "metabolic_rate");
  check(in.clothing, 0, 2, "clothing");
}

/// Partial water vapour pressure in Pa from relative humidity, using the
/// saturation correlation exp(16.6536 - 4030.183 / (t + 235)) kPa.
inline double vapour_pressure_pa(double rel_humidity, double temp_c) {
  return rel_humidity * 10.0 * std::exp(16.6536 - 4030.183 / (temp_c + 235.0));
}

inline double clothing_area_factor(double icl_m2kw) {
  return icl_m2kw <= 0.078 ? 1.0 + 1.29 * icl_m2kw : 1.05 + 0.645 * icl_m2kw;
}

inline PmvResult compute_pmv(const PmvInput& in) {
  check_envelope(in);

  const double ta = in.ambient_temp;
  const double tr = in.radiation_temp;
  const double pa = vapour_pressure_pa(in.rel_humidity, ta);
  const double icl = kCloToM2KW * in.clothing;
  const double m = in.metabolic_rate * kMetToWm2;
  const double mw = m;  // no external work
  const double fcl = clothing_area_factor(icl);
  const double hc_forced = 12.1 * std::sqrt(in.air_velocity);
  const double tra4 = std::pow(tr + 273.0, 4);

  // Heat balance at the clothing surface:
  //   tcl = 35.7 - 0.028 mw - icl fcl (3.96e-8 (Tcl^4 - Tr^4) + hc (tcl - ta))
  // The convective term is taken implicitly so the map stays contractive up
  // to 2 clo; the radiative term is lagged and the update damped.
  auto convection = [&](double tcl) { return std::max(hc_forced, 2.38 * std::pow(std::abs(tcl - ta), 0.25)); };
  auto next = [&](double tcl) {
    const double hc = convection(tcl);
    const double rad = 3.96e-8 * (std::pow(tcl + 273.0, 4) - tra4);
    return (35.7 - 0.028 * mw - icl * fcl * (rad - hc * ta)) / (1.0 + icl * fcl * hc);
  };

  PmvResult res;
  double tcl = ta + (35.5 - ta) / (3.5 * (6.45 * icl + 0.1));
  for (res.iterations = 1; res.iterations <= kMaxIterations; ++res.iterations) {
    const double proposed = next(tcl);
    const double residual = std::abs(proposed - tcl);
    tcl += kDamping * (proposed - tcl);
    if (residual < kTolerance) {
      res.converged = true;
      break;
    }
  }
  if (!res.converged) res.iterations = kMaxIterations;
  res.clothing_surface_temp = tcl;

  const double hc = convection(tcl);
  const double ts = 0.303 * std::exp(-0.036 * m) + 0.028;
  const double skin_diffusion = 3.05e-3 * (5733.0 - 6.99 * mw - pa);
  const double sweat = mw > kMetToWm2 ? 0.42 * (mw - kMetToWm2) : 0.0;
  const double latent_resp = 1.7e-5 * m * (5867.0 - pa);
  const double dry_resp = 0.0014 * m * (34.0 - ta);
  const double radiation = 3.96e-8 * fcl * (std::pow(tcl + 273.0, 4) - tra4);
  const double convective = fcl * hc * (tcl - ta);
  const double load = mw - skin_diffusion - sweat - latent_resp - dry_resp - radiation - convective;
  res.pmv = std::clamp(ts * load, -kReportClamp, kReportClamp);
  return res;
}

/// Nearest 7-point label; the closed interval [-0.5, 0.5] is Comfortable,
/// other ties round away from zero.
inline ThermalLabel pmv_to_label(double pmv) {
  if (!std::isfinite(pmv)) throw Error(Errc::InputOutOfEnvelope, "pmv is not finite");
  if (std::abs(pmv) <= 0.5) return ThermalLabel::from_int(0);
  const double rounded = std::round(pmv);  // half away from zero
  return ThermalLabel::from_int(static_cast<int>(std::clamp(rounded, -3.0, 3.0)));
}

}  // namespace comfort::pmv
