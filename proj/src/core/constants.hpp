#pragma once

namespace ewsim::constants {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

inline constexpr double hbar = 1.054571817e-34;              // J s
inline constexpr double k_boltzmann = 1.380649e-23;          // J/K
inline constexpr double g_earth = 9.81;                      // m/s^2
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg

}  // namespace ewsim::constants
