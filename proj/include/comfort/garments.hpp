#pragma once

// Clothing insulation of individual garments and common ensembles, in clo,
// from the ASHRAE 55 clothing tables. data/garments.json ships the same
// table; tests keep the two in sync.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "comfort/error.hpp"

namespace comfort::pmv {

struct Garment {
  std::string_view id;
  double clo;
};

inline constexpr int kGarmentTableVersion = 1;

inline constexpr Garment kGarments[] = {
    // underwear
    {"bra", 0.01},
    {"panties", 0.03},
    {"mens-briefs", 0.04},
    {"t-shirt", 0.08},
    {"half-slip", 0.14},
    {"long-underwear-bottoms", 0.15},
    {"full-slip", 0.16},
    {"long-underwear-top", 0.20},
    // footwear
    {"ankle-socks", 0.02},
    {"pantyhose", 0.02},
    {"sandals", 0.02},
    {"shoes", 0.02},
    {"slippers", 0.03},
    {"calf-socks", 0.03},
    {"knee-socks", 0.06},
    {"boots", 0.10},
    // shirts and blouses
    {"sleeveless-blouse", 0.12},
    {"short-sleeve-knit-shirt", 0.17},
    {"short-sleeve-shirt", 0.19},
    {"long-sleeve-shirt", 0.25},
    {"long-sleeve-flannel-shirt", 0.34},
    {"long-sleeve-sweatshirt", 0.34},
    // trousers and coveralls
    {"short-shorts", 0.06},
    {"walking-shorts", 0.08},
    {"trousers-thin", 0.15},
    {"trousers", 0.24},
    {"sweatpants", 0.28},
    {"overalls", 0.30},
    {"coveralls", 0.49},
    // skirts and dresses
    {"skirt-thin", 0.14},
    {"skirt-thick", 0.23},
    {"sleeveless-dress-thin", 0.23},
    {"long-sleeve-dress-thin", 0.33},
    // sweaters and jackets
    {"sleeveless-vest-thin", 0.13},
    {"sleeveless-vest-thick", 0.22},
    {"sweater-thin", 0.25},
    {"sweater-thick", 0.36},
    {"jacket-thin", 0.36},
    {"jacket-thick", 0.44},
    // whole ensembles, including underwear and footwear
    {"ensemble-trousers-short-sleeve-shirt", 0.57},
    {"ensemble-trousers-long-sleeve-shirt", 0.61},
    {"ensemble-walking-shorts-short-sleeve-shirt", 0.36},
    {"ensemble-knee-skirt-short-sleeve-shirt", 0.54},
    {"ensemble-trousers-long-sleeve-shirt-suit-jacket", 0.96},
};

inline std::span<const Garment> garment_table() { return kGarments; }

inline double garment_clo(std::string_view id) {
  for (const auto& g : kGarments)
    if (g.id == id) return g.clo;
  throw Error(Errc::UnknownGarment, "garment '" + std::string(id) + "' is not in the clothing table");
}

/// Summed insulation of the listed garments.
inline double clo_lookup(std::span<const std::string> garments) {
  double total = 0.0;
  for (const auto& id : garments) total += garment_clo(id);
  return total;
}

}  // namespace comfort::pmv
