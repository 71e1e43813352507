#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "nevgrowth/errors.hpp"

namespace nevgrowth {

inline constexpr double kE = std::numbers::e;
inline constexpr double kPi = std::numbers::pi;
/// Length factor of the path: segment plus circle never exceed (2 pi + 1) r.
inline constexpr double kPathFactor = 2.0 * kPi + 1.0;
/// Annulus base for the density lemma.
inline constexpr double kAlpha = 2.0 * kE;
inline constexpr double kEtaMax = 1.5 * kE;

/// Exponent of the minimum-modulus estimate, 2 + log(3e / (2 eta)).
inline double H(double eta) {
  if (!(eta > 0.0) || eta > kEtaMax)
    throw DomainError("eta must lie in (0, 3e/2], got " + std::to_string(eta));
  return 2.0 + std::log(3.0 * kE / (2.0 * eta));
}

/// Largest admissible eta (exclusive) for the density theorem.
inline double density_eta_threshold() { return (1.0 + std::log(2.0)) / (16.0 * std::exp(2.5)); }

/// Ceiling on the logarithmic density of the radial exceptional set.
inline double density_ceiling(double eta) {
  if (!(eta > 0.0)) throw DomainError("eta must be positive");
  return 16.0 * eta * std::exp(2.5) / (1.0 + std::log(2.0));
}

}  // namespace nevgrowth
