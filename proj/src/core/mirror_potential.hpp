#pragma once

#include <optional>

#include "core/ew_optics.hpp"
#include "core/species.hpp"

namespace ewsim::mirror_potential {

/// Total mirror potential above the prism surface,
///   U(z) = u0 exp(-2 kappa z) + M g z - C3 / z^3,
/// with gravity and van der Waals terms individually switchable. z_min is the
/// evaluation cutoff that keeps the vdW singularity out of reach; it only
/// applies while the vdW term is enabled.
struct MirrorPotential {
  double u0 = 0;       // J
  double kappa = 0;    // 1/m
  double c3 = 0;       // J m^3
  double mg = 0;       // N (species mass * g)
  double z_min = 10e-9;
  bool include_gravity = true;
  bool include_vdw = true;

  double operator()(double z) const;
  double derivative(double z) const;
  void validate() const;
};

/// Lennard-Jones style coefficient for a two-level atom in front of a
/// dielectric: C3 = (3/16) (n^2-1)/(n^2+1) hbar Gamma / k0^3.
double default_c3(double refractive_index, const AtomSpecies& species);

struct BarrierReport {
  double barrier_height = 0;
  double barrier_position = 0;
  bool bounces = false;
  std::optional<double> turning_point;
};

/// Locates the potential maximum (1024-point log-grid bracket followed by
/// golden-section refinement to 1e-4 xi) and, when the barrier exceeds the
/// incident energy, the outermost classical turning point U(z) = E, solved
/// to |U - E| <= 1e-6 E.
BarrierReport barrier(const MirrorPotential& pot, double e_incident);

/// Largest blue detuning that still reflects an atom dropped from
/// fall_height at the beam center (E = M g h). vdW included; bisection on
/// the monotone barrier-vs-detuning relation. c3_scale rescales the default
/// C3 for sensitivity studies.
double detuning_threshold(const ew_optics::EwGeometry& geom,
                          const AtomSpecies& species, double power,
                          double fall_height, double c3_scale = 1.0);

struct DecayLengthThreshold {
  double xi;
  double kappa;
  double angle;  // angle of incidence realizing xi
};

/// Smallest decay length (largest angle) that still reflects the dropped
/// atom at fixed detuning; accounts for the Fresnel enhancement varying
/// along the angle scan.
DecayLengthThreshold decay_length_threshold(const ew_optics::EwGeometry& geom,
                                            const AtomSpecies& species,
                                            double power, double detuning,
                                            double fall_height,
                                            double c3_scale = 1.0);

/// Transverse radius where the local barrier height (Gaussian beam profile)
/// drops to the incident energy. Zero when even the beam center is below
/// threshold.
double effective_mirror_radius(const ew_optics::EwField& field,
                               const AtomSpecies& species, double e_incident,
                               double c3);

/// Fraction of a horizontal Gaussian cloud (rms radius sigma per axis,
/// center displaced by mot_offset from the mirror axis) that lands inside
/// the mirror disk of radius r_eff.
double bounce_fraction(double cloud_sigma, double mot_offset, double r_eff);

}  // namespace ewsim::mirror_potential
