#pragma once

#include <cmath>
#include <string>

#include "core/constants.hpp"
#include "core/errors.hpp"

namespace ewsim {

/// Two-level atom parameters for one optical transition.
struct AtomSpecies {
  std::string name;
  double wavelength_vacuum = 0;    // m
  double linewidth = 0;            // rad/s
  double saturation_intensity = 0; // W/m^2
  double mass = 0;                 // kg
  double recoil_velocity = 0;      // m/s, hbar*k0/mass

  double k0() const { return constants::two_pi / wavelength_vacuum; }

  void validate() const {
    if (wavelength_vacuum <= 0 || linewidth <= 0 || saturation_intensity <= 0 ||
        mass <= 0 || recoil_velocity <= 0) {
      throw ConfigError("AtomSpecies '" + name + "': all fields must be strictly positive");
    }
    const double expected = constants::hbar * k0() / mass;
    if (std::abs(recoil_velocity - expected) > 1e-9 * expected) {
      throw ConfigError("AtomSpecies '" + name +
                        "': recoil_velocity inconsistent with wavelength and mass");
    }
  }
};

/// 87Rb D2 line (780 nm). Linewidth and saturation intensity are the values
/// the reference experiment quotes (Gamma = 2pi x 6.0 MHz, I0 = 1.65 mW/cm^2).
inline AtomSpecies rb87_d2() {
  AtomSpecies s;
  s.name = "Rb87_D2";
  s.wavelength_vacuum = 780.241e-9;
  s.linewidth = constants::two_pi * 6.0e6;
  s.saturation_intensity = 16.5;
  s.mass = 86.909180527 * constants::atomic_mass_unit;
  s.recoil_velocity = constants::hbar * s.k0() / s.mass;
  return s;
}

inline AtomSpecies species_preset(const std::string& name) {
  if (name == "Rb87_D2") return rb87_d2();
  throw ConfigError("unknown species preset '" + name + "' (available: Rb87_D2)");
}

}  // namespace ewsim
