#pragma once

#include <string>

#include "core/constants.hpp"
#include "core/errors.hpp"
#include "core/species.hpp"

namespace ewsim {

/// Laser detunings are accepted in exactly two tagged input modes to avoid
/// the 2*pi ambiguity: multiples of the natural linewidth ("Gamma") or an
/// absolute frequency in MHz (converted as delta = 2*pi * 1e6 * value).
enum class DetuningUnit { Gamma, MegaHertz };

struct Detuning {
  double value = 0;
  DetuningUnit unit = DetuningUnit::Gamma;

  double to_angular(const AtomSpecies& species) const {
    switch (unit) {
      case DetuningUnit::Gamma: return value * species.linewidth;
      case DetuningUnit::MegaHertz: return constants::two_pi * 1e6 * value;
    }
    throw ConfigError("invalid detuning unit");
  }

  bool operator==(const Detuning&) const = default;
};

inline DetuningUnit parse_detuning_unit(const std::string& s) {
  if (s == "Gamma" || s == "gamma") return DetuningUnit::Gamma;
  if (s == "MHz") return DetuningUnit::MegaHertz;
  throw ConfigError("detuning unit must be 'Gamma' or 'MHz', got '" + s + "'");
}

inline std::string detuning_unit_name(DetuningUnit u) {
  return u == DetuningUnit::Gamma ? "Gamma" : "MHz";
}

}  // namespace ewsim
