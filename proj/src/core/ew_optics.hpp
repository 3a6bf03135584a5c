#pragma once

#include <string>

#include "core/species.hpp"
#include "core/units.hpp"

namespace ewsim::ew_optics {

enum class Polarization { TM, TE };

Polarization parse_polarization(const std::string& s);
std::string polarization_name(Polarization p);

/// Beam-side description of the evanescent-wave mirror: prism index, angle of
/// incidence, collimated Gaussian beam (1/e^2 intensity radius) and power.
struct EwGeometry {
  double refractive_index = 1.51;
  double angle = 0;  // rad, absolute angle of incidence
  double waist = 335e-6;
  double power = 19e-3;
  Polarization polarization = Polarization::TM;

  void validate() const;
};

/// Derived field quantities at the vacuum side of the interface.
struct EwField {
  double decay_constant = 0;        // kappa, 1/m
  double decay_length = 0;          // xi = 1/kappa, m
  double kx = 0;                    // propagating wavevector component, 1/m
  double enhancement = 0;           // Fresnel intensity enhancement T
  double peak_intensity_glass = 0;  // 2P/(pi w^2), W/m^2
  double u0 = 0;                    // dipole potential at z=0, beam center, J
  double detuning = 0;              // rad/s, signed
  double waist = 0;                 // carried for the transverse profile
};

struct DecayProfile {
  double kappa;
  double xi;
  double kx;
};

/// arcsin(1/n); total internal reflection requires angles above this.
double critical_angle(double refractive_index);

/// kappa = k0 sqrt(n^2 sin^2 theta - 1), xi = 1/kappa, kx = k0 n sin theta.
DecayProfile decay_profile(const EwGeometry& geom, const AtomSpecies& species);

/// Inverse of decay_profile: the angle of incidence producing a given kappa.
double angle_from_kappa(double refractive_index, const AtomSpecies& species,
                        double kappa);
double angle_from_decay_length(double refractive_index,
                               const AtomSpecies& species, double xi);

/// Relay-telescope control: displacing the steering lens by delta_a changes
/// the angle of incidence by delta_a / (f n).
double telescope_angle(double delta_a, double focal_length,
                       double refractive_index);

/// Intensity enhancement at the vacuum side for TM (p) polarization:
///   T = |t_p|^2 (2 n^2 sin^2 theta - 1) / n,
/// with the complex transmission amplitude of the glass->vacuum interface
///   t_p = 2 n cos theta / (cos theta + i n sqrt(n^2 sin^2 theta - 1)).
double enhancement_tm(const EwGeometry& geom);

/// TE (s) counterpart, T = |t_s|^2 / n with
///   t_s = 2 cos theta / (cos theta + i sqrt(n^2 sin^2 theta - 1)).
double enhancement_te(const EwGeometry& geom);

/// Assembles the field record; u0 = hbar delta s0 / 2 with
/// s0 = (Gamma/2 delta)^2 T I / I0 evaluated at z=0, beam center.
EwField make_field(const EwGeometry& geom, const AtomSpecies& species,
                   double detuning);

/// s(z, r) = (Gamma/2 delta)^2 T I(r)/I0 exp(-2 kappa z), Gaussian beam
/// profile I(r) = I_peak exp(-2 r^2 / w^2).
double saturation_parameter(const EwField& field, const AtomSpecies& species,
                            double z, double r);

/// U_dip(z, r) = hbar delta s(z, r) / 2. Positive for blue detuning.
double dipole_potential(const EwField& field, const AtomSpecies& species,
                        double z, double r);

/// Steady-state low-saturation scattering rate Gamma' = s Gamma / 2
///                                   = (Gamma / hbar delta) U_dip.
double scattering_rate(const EwField& field, const AtomSpecies& species,
                       double z, double r);

}  // namespace ewsim::ew_optics
