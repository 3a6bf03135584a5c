#include "core/mirror_potential.hpp"

#include <cmath>

#include "core/constants.hpp"
#include "core/errors.hpp"
#include "core/quadrature.hpp"
#include "core/roots.hpp"

namespace ewsim::mirror_potential {

using constants::g_earth;
using constants::hbar;

void MirrorPotential::validate() const {
  if (kappa <= 0) throw ConfigError("mirror potential: kappa must be positive");
  if (c3 < 0) throw ConfigError("mirror potential: C3 must be nonnegative");
  if (z_min <= 0) throw ConfigError("mirror potential: z_min must be positive");
}

double MirrorPotential::operator()(double z) const {
  if (include_vdw && z < z_min) {
    throw ConfigError("potential evaluated below z_min (vdW cutoff)");
  }
  double u = u0 * std::exp(-2.0 * kappa * z);
  if (include_gravity) u += mg * z;
  if (include_vdw) u -= c3 / (z * z * z);
  return u;
}

double MirrorPotential::derivative(double z) const {
  if (include_vdw && z < z_min) {
    throw ConfigError("potential evaluated below z_min (vdW cutoff)");
  }
  double d = -2.0 * kappa * u0 * std::exp(-2.0 * kappa * z);
  if (include_gravity) d += mg;
  if (include_vdw) d += 3.0 * c3 / (z * z * z * z);
  return d;
}

double default_c3(double refractive_index, const AtomSpecies& species) {
  const double n2 = refractive_index * refractive_index;
  const double k0 = species.k0();
  return (3.0 / 16.0) * (n2 - 1.0) / (n2 + 1.0) * hbar * species.linewidth /
         (k0 * k0 * k0);
}

BarrierReport barrier(const MirrorPotential& pot, double e_incident) {
  if (e_incident <= 0) throw ConfigError("incident energy must be positive");
  pot.validate();

  BarrierReport rep;
  const double xi = 1.0 / pot.kappa;
  const double z_hi = 10.0 * xi;

  if (!pot.include_vdw) {
    // Pure optical barrier: the maximum sits at the surface.
    rep.barrier_height = pot.u0;
    rep.barrier_position = 0.0;
  } else {
    // Log-grid bracket of the interior maximum, then golden-section refine.
    constexpr int kGrid = 1024;
    const double lr = std::log(z_hi / pot.z_min) / (kGrid - 1);
    int best = 0;
    double best_val = -1e300;
    for (int i = 0; i < kGrid; ++i) {
      const double z = pot.z_min * std::exp(lr * i);
      const double v = pot(z);
      if (v > best_val) {
        best_val = v;
        best = i;
      }
    }
    const double lo = pot.z_min * std::exp(lr * std::max(best - 1, 0));
    const double hi = pot.z_min * std::exp(lr * std::min(best + 1, kGrid - 1));
    const double zb = golden_max([&](double z) { return pot(z); }, lo, hi,
                                 1e-4 * xi);
    rep.barrier_position = zb;
    rep.barrier_height = pot(zb);
  }

  rep.bounces = rep.barrier_height > e_incident;
  if (rep.bounces) {
    // Outermost crossing of U = E on the descending branch beyond the
    // barrier. For very small energies the gravity (or vdW-tail) branch can
    // rise back above E; the turning point is then reported as absent.
    const double lo = std::max(rep.barrier_position, pot.z_min);
    if (pot(lo) <= e_incident) {
      rep.turning_point = lo;
      return rep;
    }
    constexpr int kGrid = 1024;
    const double lr = std::log(z_hi / lo) / (kGrid - 1);
    double prev_z = lo;
    double prev_u = pot(lo);
    for (int i = 1; i < kGrid; ++i) {
      const double z = lo * std::exp(lr * i);
      const double u = pot(z);
      if (u <= e_incident) {
        rep.turning_point = bisect(
            [&](double zz) { return pot(zz) - e_incident; }, prev_z, z, 0.0,
            1e-6 * e_incident, 400, "turning point");
        break;
      }
      if (u > prev_u && i > 2) break;  // passed the far-side minimum
      prev_z = z;
      prev_u = u;
    }
  }
  return rep;
}

namespace {

MirrorPotential local_potential(double u0, double kappa,
                                const AtomSpecies& species, double c3) {
  MirrorPotential pot;
  pot.u0 = u0;
  pot.kappa = kappa;
  pot.c3 = c3;
  pot.mg = species.mass * g_earth;
  pot.include_gravity = true;
  pot.include_vdw = true;
  return pot;
}

bool bounces_at(double u0, double kappa, const AtomSpecies& species, double c3,
                double e_incident) {
  return barrier(local_potential(u0, kappa, species, c3), e_incident).bounces;
}

}  // namespace

double detuning_threshold(const ew_optics::EwGeometry& geom,
                          const AtomSpecies& species, double power,
                          double fall_height, double c3_scale) {
  if (power <= 0) throw ConfigError("detuning threshold: power must be positive");
  if (fall_height <= 0) throw ConfigError("detuning threshold: fall height must be positive");

  ew_optics::EwGeometry g = geom;
  g.power = power;
  const double e_incident = species.mass * g_earth * fall_height;
  const double c3 = c3_scale * default_c3(g.refractive_index, species);
  const auto prof = ew_optics::decay_profile(g, species);

  auto bounces = [&](double delta) {
    const auto field = ew_optics::make_field(g, species, delta);
    return bounces_at(field.u0, prof.kappa, species, c3, e_incident);
  };

  double lo = species.linewidth;
  if (!bounces(lo)) {
    throw NoBounceError("threshold not found: no bounce even at delta = Gamma");
  }
  double hi = 100.0 * species.linewidth;
  while (bounces(hi)) {
    hi *= 4.0;
    if (hi > 1e9 * species.linewidth) {
      throw NumericError("detuning threshold: no upper bracket below 1e9 Gamma");
    }
  }
  while (hi / lo > 1.0 + 1e-9) {
    const double mid = std::sqrt(lo * hi);
    (bounces(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

DecayLengthThreshold decay_length_threshold(const ew_optics::EwGeometry& geom,
                                            const AtomSpecies& species,
                                            double power, double detuning,
                                            double fall_height,
                                            double c3_scale) {
  if (power <= 0 || fall_height <= 0) {
    throw ConfigError("decay length threshold: power and fall height must be positive");
  }
  if (detuning <= 0) {
    throw ConfigError("decay length threshold: requires blue detuning");
  }
  const double n = geom.refractive_index;
  const double e_incident = species.mass * g_earth * fall_height;
  const double c3 = c3_scale * default_c3(n, species);

  auto bounces = [&](double xi) {
    ew_optics::EwGeometry g = geom;
    g.power = power;
    g.angle = ew_optics::angle_from_decay_length(n, species, xi);
    const auto field = ew_optics::make_field(g, species, detuning);
    return bounces_at(field.u0, 1.0 / xi, species, c3, e_incident);
  };

  // Geometric floor: kappa cannot exceed k0 sqrt(n^2 - 1) (theta -> pi/2).
  const double xi_floor =
      1.0 / (species.k0() * std::sqrt(n * n - 1.0)) * (1.0 + 1e-9);
  double hi = 3e-6;
  while (!bounces(hi)) {
    hi *= 2.0;
    if (hi > 1e-3) {
      throw NoBounceError("threshold not found: no bounce even at xi = 1 mm");
    }
  }
  if (bounces(xi_floor)) {
    // Bounces all the way down to the geometric limit.
    DecayLengthThreshold out;
    out.xi = xi_floor;
    out.kappa = 1.0 / out.xi;
    out.angle = ew_optics::angle_from_decay_length(n, species, out.xi);
    return out;
  }
  double lo = xi_floor;
  while (hi / lo > 1.0 + 1e-9) {
    const double mid = std::sqrt(lo * hi);
    (bounces(mid) ? hi : lo) = mid;
  }
  DecayLengthThreshold out;
  out.xi = 0.5 * (lo + hi);
  out.kappa = 1.0 / out.xi;
  out.angle = ew_optics::angle_from_decay_length(n, species, out.xi);
  return out;
}

double effective_mirror_radius(const ew_optics::EwField& field,
                               const AtomSpecies& species, double e_incident,
                               double c3) {
  auto bounces = [&](double r) {
    const double u0_local =
        field.u0 * std::exp(-2.0 * r * r / (field.waist * field.waist));
    return bounces_at(u0_local, field.decay_constant, species, c3, e_incident);
  };
  if (!bounces(0.0)) return 0.0;
  double hi = field.waist;
  while (bounces(hi)) {
    hi *= 2.0;
    if (hi > 100.0 * field.waist) {
      throw NumericError("effective mirror radius: no upper bracket");
    }
  }
  double lo = 0.0;
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    (bounces(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

// exp(-x) I0(x); series for small x, asymptotic expansion beyond.
double bessel_i0_scaled(double x) {
  if (x < 20.0) {
    double term = 1.0, sum = 1.0;
    const double q = 0.25 * x * x;
    for (int k = 1; k < 60; ++k) {
      term *= q / (static_cast<double>(k) * k);
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return sum * std::exp(-x);
  }
  const double ix = 1.0 / (8.0 * x);
  return (1.0 + ix + 4.5 * ix * ix + 37.5 * ix * ix * ix) /
         std::sqrt(constants::two_pi * x);
}

}  // namespace

double bounce_fraction(double cloud_sigma, double mot_offset, double r_eff) {
  if (cloud_sigma <= 0) throw ConfigError("bounce fraction: cloud sigma must be positive");
  if (r_eff <= 0) return 0.0;
  const double d = std::abs(mot_offset);
  if (d == 0.0) {
    return 1.0 - std::exp(-r_eff * r_eff / (2.0 * cloud_sigma * cloud_sigma));
  }
  const double s2 = cloud_sigma * cloud_sigma;
  auto radial = [&](double r) {
    const double x = r * d / s2;
    return (r / s2) * std::exp(-(r - d) * (r - d) / (2.0 * s2)) *
           bessel_i0_scaled(x);
  };
  return integrate_adaptive(radial, 0.0, r_eff, 1e-12, 1e-15);
}

}  // namespace ewsim::mirror_potential
