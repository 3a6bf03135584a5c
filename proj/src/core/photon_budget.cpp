#include "core/photon_budget.hpp"

#include <cmath>

#include "core/constants.hpp"
#include "core/errors.hpp"
#include "core/ode.hpp"
#include "core/quadrature.hpp"
#include "core/roots.hpp"

namespace ewsim::photon_budget {

using constants::hbar;
using constants::two_pi;

std::vector<HyperfineLine> rb87_d2_pi_lines() {
  const double s32 = two_pi * 266.650e6;
  const double s21 = two_pi * 156.947e6;
  const double s10 = two_pi * 72.218e6;
  std::vector<HyperfineLine> lines(4);
  lines[0] = {3, 0.0,
              {1.0 / 3, 8.0 / 15, 3.0 / 5, 8.0 / 15, 1.0 / 3}};
  lines[1] = {2, s32, {1.0 / 3, 1.0 / 12, 0.0, 1.0 / 12, 1.0 / 3}};
  lines[2] = {1, s32 + s21, {0.0, 1.0 / 20, 1.0 / 15, 1.0 / 20, 0.0}};
  lines[3] = {0, s32 + s21 + s10, {0.0, 0.0, 0.0, 0.0, 0.0}};
  return lines;
}

double nscat_analytic(const AtomSpecies& species,
                      const ew_optics::EwField& field, double p_incident) {
  if (field.detuning <= 0) {
    throw NoBounceError("nscat requires blue detuning (red detuning has no barrier)");
  }
  if (field.decay_constant <= 0 || p_incident <= 0) {
    throw ConfigError("nscat_analytic: kappa and p_i must be positive");
  }
  return (species.linewidth / field.detuning) * p_incident /
         (hbar * field.decay_constant);
}

double nscat_path_integral(const AtomSpecies& species,
                           const ew_optics::EwField& field,
                           const mirror_potential::MirrorPotential& pot,
                           double p_incident) {
  if (pot.include_gravity) {
    throw ConfigError(
        "nscat_path_integral: momentum-space mapping requires a gravity-free "
        "mirror potential (set include_gravity = false)");
  }
  const double e_incident = p_incident * p_incident / (2.0 * species.mass);
  const auto rep = mirror_potential::barrier(pot, e_incident);
  if (!rep.bounces) {
    throw NoBounceError("nscat_path_integral: barrier below incident energy");
  }

  const double kappa = pot.kappa;
  const double xi = 1.0 / kappa;

  // Outermost z where U = 0 (finite when the vdW tail dominates at large z).
  double z_zero = 0;
  if (pot.include_vdw) {
    double hi = 10.0 * xi;
    while (pot(hi) > 0) {
      hi *= 2.0;
      if (hi > 1e4 * xi) {
        throw NumericError("nscat_path_integral: no U=0 crossing found");
      }
    }
    z_zero = bisect([&](double z) { return pot(z); }, rep.barrier_position, hi,
                    1e-14 * xi, 0.0, 300, "U=0 crossing");
  }

  auto z_of_energy = [&](double u_val) {
    if (!pot.include_vdw) {
      return std::log(pot.u0 / u_val) / (2.0 * kappa);
    }
    if (u_val <= 0.0) return z_zero;
    const double lo = std::max(rep.barrier_position, pot.z_min);
    return bisect([&](double z) { return pot(z) - u_val; }, lo, z_zero,
                  1e-14 * xi, 0.0, 300, "z(p) root");
  };

  auto integrand = [&](double p) {
    const double u_val =
        (p_incident * p_incident - p * p) / (2.0 * species.mass);
    double z;
    try {
      z = z_of_energy(u_val);
    } catch (const NumericError& e) {
      throw NumericError("nscat_path_integral: root bracketing failed at p=" +
                         std::to_string(p) + " (" + e.what() + ")");
    }
    const double u_dip = pot.u0 * std::exp(-2.0 * kappa * z);
    const double force = -pot.derivative(z);
    return u_dip / force;
  };

  const double integral =
      2.0 * integrate_adaptive(integrand, 0.0, p_incident, 1e-6);
  return species.linewidth / (hbar * field.detuning) * integral;
}

double steady_state_population(double s) { return 0.5 * s / (1.0 + s); }

ObeResult obe_scattered_photons(const AtomSpecies& species, double pulse_peak_s,
                                double tau, double detuning,
                                bool record_states) {
  if (tau <= 0) throw ConfigError("obe: tau must be positive");
  if (pulse_peak_s < 0) throw ConfigError("obe: peak saturation must be nonnegative");
  if (detuning == 0) throw ConfigError("obe: resonant detuning");

  const double gamma = species.linewidth;
  const double span = 12.0;
  ObeResult out;
  out.n_unsaturated = pulse_peak_s * gamma * tau * std::tanh(span);
  if (pulse_peak_s == 0.0) {
    out.deficit = 0.0;
    return out;
  }

  const double omega_scale =
      std::sqrt(pulse_peak_s * (gamma * gamma + 4.0 * detuning * detuning) / 2.0);
  double max_ee = 0.0;

  // Bloch vector (u, v, w) plus the accumulated photon count N; the system
  // is linear, y' = A(t) y + b, with rho_ee = (1+w)/2 and N' = Gamma rho_ee.
  LinearImplicitMidpoint<4> mid;
  mid.rtol = 1e-8;
  mid.atol = 1e-12;
  mid.max_step = tau / 10.0;
  mid.on_step = [&](double t, const std::array<double, 4>& y) {
    max_ee = std::max(max_ee, 0.5 * (1.0 + y[2]));
    if (record_states) {
      out.states.push_back(
          {0.5 * (1.0 + y[2]), 0.5 * y[0], 0.5 * y[1], t});
    }
  };

  auto a_of = [&](double t) {
    const double omega = omega_scale / std::cosh(t / tau);
    LinearImplicitMidpoint<4>::Mat a{};
    a[0] = {-0.5 * gamma, detuning, 0.0, 0.0};
    a[1] = {-detuning, -0.5 * gamma, -omega, 0.0};
    a[2] = {0.0, omega, -gamma, 0.0};
    a[3] = {0.0, 0.0, 0.5 * gamma, 0.0};
    return a;
  };
  auto b_of = [&](double) {
    return LinearImplicitMidpoint<4>::Vec{0.0, 0.0, -gamma, 0.5 * gamma};
  };

  std::array<double, 4> y0{0.0, 0.0, -1.0, 0.0};
  std::array<double, 4> yf;
  try {
    yf = mid.integrate(a_of, b_of, -span * tau, span * tau, y0);
  } catch (const NumericError& e) {
    throw NumericError(std::string("obe integrator did not converge: ") + e.what());
  }
  out.n_scattered = yf[3];
  out.deficit = 1.0 - out.n_scattered / out.n_unsaturated;
  out.max_excited_population = max_ee;
  return out;
}

double hyperfine_factor(const std::vector<HyperfineLine>& lines,
                        double detuning) {
  if (lines.empty()) throw ConfigError("hyperfine factor: no lines");
  double total = 0.0;
  int counted = 0;
  for (int m = 0; m < 5; ++m) {
    double s1 = 0.0, s2 = 0.0, wsum = 0.0;
    for (const auto& line : lines) {
      const double w = line.strength[m];
      if (w == 0.0) continue;
      const double d = detuning + line.detuning_offset;
      if (d <= 0.0) {
        throw ConfigError("hyperfine factor: line crossing, detuning from F'=" +
                          std::to_string(line.f_prime) + " is not blue");
      }
      s1 += w / d;
      s2 += w / (d * d);
      wsum += w;
    }
    if (wsum == 0.0) continue;
    total += detuning * s2 / s1;
    ++counted;
  }
  if (counted == 0) throw ConfigError("hyperfine factor: all strengths zero");
  return total / counted;
}

ScatterBudget corrected_prediction(const AtomSpecies& species,
                                   const ew_optics::EwField& field,
                                   const mirror_potential::MirrorPotential& pot,
                                   double p_incident,
                                   const std::vector<HyperfineLine>& lines,
                                   const CorrectionToggles& toggles) {
  ScatterBudget b;
  b.n_twolevel = nscat_analytic(species, field, p_incident);
  b.n_pathintegral = nscat_path_integral(species, field, pot, p_incident);

  b.pulse_tau = species.mass / (pot.kappa * p_incident);
  b.saturation_at_turning =
      p_incident * p_incident / (species.mass * hbar * field.detuning);
  b.adiabaticity = 1.0 / (species.linewidth * b.pulse_tau);

  if (toggles.obe) {
    const auto obe = obe_scattered_photons(species, b.saturation_at_turning,
                                           b.pulse_tau, field.detuning);
    b.obe_deficit = obe.deficit;
    b.n_obe = b.n_pathintegral * (1.0 - obe.deficit);
  } else {
    b.obe_deficit = 0.0;
    b.n_obe = b.n_pathintegral;
  }

  b.hyperfine_factor = toggles.hyperfine ? hyperfine_factor(lines, field.detuning) : 1.0;
  b.roughness_offset = toggles.roughness_offset;
  b.n_corrected = b.n_obe * b.hyperfine_factor + b.roughness_offset;
  return b;
}

}  // namespace ewsim::photon_budget
