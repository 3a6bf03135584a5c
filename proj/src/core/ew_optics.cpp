#include "core/ew_optics.hpp"

#include <cmath>

#include "core/constants.hpp"
#include "core/errors.hpp"

namespace ewsim::ew_optics {

using constants::hbar;

Polarization parse_polarization(const std::string& s) {
  if (s == "TM" || s == "tm") return Polarization::TM;
  if (s == "TE" || s == "te") return Polarization::TE;
  throw ConfigError("polarization must be TM or TE, got '" + s + "'");
}

std::string polarization_name(Polarization p) {
  return p == Polarization::TM ? "TM" : "TE";
}

void EwGeometry::validate() const {
  if (refractive_index <= 1.0) {
    throw ConfigError("refractive index must exceed 1 for total internal reflection");
  }
  if (waist <= 0) throw ConfigError("beam waist must be positive");
  if (power < 0) throw ConfigError("beam power must be nonnegative");
  const double thc = critical_angle(refractive_index);
  if (!(angle > thc && angle < constants::pi / 2)) {
    throw ConfigError("angle of incidence must lie in (theta_c, pi/2)");
  }
}

double critical_angle(double refractive_index) {
  if (refractive_index <= 1.0) {
    throw ConfigError("invalid medium: refractive index must exceed 1");
  }
  return std::asin(1.0 / refractive_index);
}

DecayProfile decay_profile(const EwGeometry& geom, const AtomSpecies& species) {
  const double n = geom.refractive_index;
  if (geom.angle <= critical_angle(n)) {
    throw ConfigError("supercritical angle required: theta must exceed theta_c");
  }
  const double k0 = species.k0();
  const double ns = n * std::sin(geom.angle);
  const double kappa = k0 * std::sqrt(ns * ns - 1.0);
  return {kappa, 1.0 / kappa, k0 * ns};
}

double angle_from_kappa(double refractive_index, const AtomSpecies& species,
                        double kappa) {
  if (kappa <= 0) throw ConfigError("kappa must be positive");
  const double n = refractive_index;
  const double q = kappa / species.k0();
  const double s = std::sqrt(1.0 + q * q) / n;
  if (s >= 1.0) {
    throw ConfigError("decay constant unreachable: kappa exceeds k0 sqrt(n^2-1)");
  }
  return std::asin(s);
}

double angle_from_decay_length(double refractive_index,
                               const AtomSpecies& species, double xi) {
  if (xi <= 0) throw ConfigError("decay length must be positive");
  return angle_from_kappa(refractive_index, species, 1.0 / xi);
}

double telescope_angle(double delta_a, double focal_length,
                       double refractive_index) {
  if (focal_length <= 0) throw ConfigError("focal length must be positive");
  return delta_a / (focal_length * refractive_index);
}

double enhancement_tm(const EwGeometry& geom) {
  if (geom.polarization != Polarization::TM) {
    throw ConfigError("enhancement_tm requires TM polarization (use enhancement_te)");
  }
  const double n = geom.refractive_index;
  if (geom.angle <= critical_angle(n)) {
    throw ConfigError("supercritical angle required for evanescent enhancement");
  }
  const double s2 = n * n * std::sin(geom.angle) * std::sin(geom.angle);
  const double c = std::cos(geom.angle);
  // |t_p|^2 = 4 n^2 cos^2 / (cos^2 + n^2 (n^2 sin^2 - 1))
  const double tp2 = 4.0 * n * n * c * c / (c * c + n * n * (s2 - 1.0));
  return tp2 * (2.0 * s2 - 1.0) / n;
}

double enhancement_te(const EwGeometry& geom) {
  const double n = geom.refractive_index;
  if (geom.angle <= critical_angle(n)) {
    throw ConfigError("supercritical angle required for evanescent enhancement");
  }
  const double s2 = n * n * std::sin(geom.angle) * std::sin(geom.angle);
  const double c = std::cos(geom.angle);
  const double ts2 = 4.0 * c * c / (c * c + (s2 - 1.0));
  return ts2 / n;
}

EwField make_field(const EwGeometry& geom, const AtomSpecies& species,
                   double detuning) {
  if (detuning == 0) {
    throw ConfigError("resonant detuning: delta must be nonzero");
  }
  geom.validate();
  const DecayProfile prof = decay_profile(geom, species);

  EwField f;
  f.decay_constant = prof.kappa;
  f.decay_length = prof.xi;
  f.kx = prof.kx;
  f.enhancement = geom.polarization == Polarization::TM ? enhancement_tm(geom)
                                                        : enhancement_te(geom);
  f.peak_intensity_glass = 2.0 * geom.power / (constants::pi * geom.waist * geom.waist);
  f.detuning = detuning;
  f.waist = geom.waist;

  const double g = species.linewidth;
  const double s0 = (g / (2.0 * detuning)) * (g / (2.0 * detuning)) *
                    f.enhancement * f.peak_intensity_glass /
                    species.saturation_intensity;
  f.u0 = 0.5 * hbar * detuning * s0;
  return f;
}

double saturation_parameter(const EwField& field, const AtomSpecies& species,
                            double z, double r) {
  if (field.detuning == 0) {
    throw ConfigError("resonant detuning: delta must be nonzero");
  }
  if (z < 0) throw ConfigError("saturation parameter: z must be nonnegative");
  const double g = species.linewidth;
  const double ratio = g / (2.0 * field.detuning);
  const double intensity = field.peak_intensity_glass *
                           std::exp(-2.0 * r * r / (field.waist * field.waist));
  return ratio * ratio * field.enhancement * intensity /
         species.saturation_intensity * std::exp(-2.0 * field.decay_constant * z);
}

double dipole_potential(const EwField& field, const AtomSpecies& species,
                        double z, double r) {
  return 0.5 * hbar * field.detuning * saturation_parameter(field, species, z, r);
}

double scattering_rate(const EwField& field, const AtomSpecies& species,
                       double z, double r) {
  return 0.5 * species.linewidth * saturation_parameter(field, species, z, r);
}

}  // namespace ewsim::ew_optics
