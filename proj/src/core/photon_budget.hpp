#pragma once

#include <array>
#include <vector>

#include "core/ew_optics.hpp"
#include "core/mirror_potential.hpp"
#include "core/species.hpp"

namespace ewsim::photon_budget {

/// Photon number predicted for one bounce, with the individual correction
/// stages broken out. n_corrected = n_obe * hyperfine_factor + roughness.
struct ScatterBudget {
  double n_twolevel = 0;      // closed form Gamma p_i / (delta hbar kappa)
  double n_pathintegral = 0;  // momentum-space quadrature, chosen potential
  double n_obe = 0;           // saturation-corrected count
  double hyperfine_factor = 1;
  double n_corrected = 0;
  double roughness_offset = 0;      // empirical additive recoils
  double obe_deficit = 0;           // 1 - N_obe/N_unsaturated of the pulse
  double saturation_at_turning = 0; // peak s seen along the bounce
  double pulse_tau = 0;             // sech^2 time constant M/(kappa p_i)
  double adiabaticity = 0;          // (1/Gamma)/tau, << 1 in the valid regime
};

/// One excited-state hyperfine line: detuning offset relative to the
/// reference (cycling) line and pi-transition strengths per ground m_F
/// sublevel, normalized to the cycling transition.
struct HyperfineLine {
  int f_prime = 0;
  double detuning_offset = 0;            // rad/s, added to the laser detuning
  std::array<double, 5> strength{};      // m_F = -2..+2
};

/// 87Rb 5P3/2 manifold as seen from F=2 with linear polarization.
/// Splittings F'=3..0: 266.650, 156.947, 72.218 MHz (literature values;
/// editable by constructing a custom line list). F'=3 strengths span
/// [1/3, 3/5]; F'=0 is dipole-forbidden from F=2.
std::vector<HyperfineLine> rb87_d2_pi_lines();

/// Eq.-form two-level result N = (Gamma/delta) p_i / (hbar kappa);
/// independent of u0 and therefore of optical power.
double nscat_analytic(const AtomSpecies& species,
                      const ew_optics::EwField& field, double p_incident);

/// Momentum-space bounce integral
///   N = Gamma/(hbar delta) * Int_{-p_i}^{p_i} U_dip / (-dU/dz) dp,
/// with z(p) the outermost root of U(z) = (p_i^2 - p^2)/2M. The potential
/// must not contain the gravity term (its outermost root would be the
/// free-fall branch); adaptive open-endpoint quadrature, rel. tol. 1e-6.
double nscat_path_integral(const AtomSpecies& species,
                           const ew_optics::EwField& field,
                           const mirror_potential::MirrorPotential& pot,
                           double p_incident);

/// Instantaneous state of the driven two-level atom.
struct BlochState {
  double excited_population = 0;  // rho_ee in [0, 1]
  double coherence_re = 0;        // rho_ge, |rho_ge| <= 1/2
  double coherence_im = 0;
  double time = 0;
};

struct ObeResult {
  double n_scattered = 0;
  double n_unsaturated = 0;  // s_peak Gamma tau tanh(T/tau)
  double deficit = 0;        // 1 - n_scattered / n_unsaturated
  double max_excited_population = 0;
  std::vector<BlochState> states;  // filled when record_states is set
};

/// Integrates the two-level optical Bloch equations through the bounce
/// pulse s(t) = s_peak sech^2(t/tau) over t in [-12 tau, 12 tau] and counts
/// N = Gamma Int rho_ee dt. The Rabi coupling follows the convention
/// s = 2 Omega^2 / (Gamma^2 + 4 delta^2), which makes the unsaturated limit
/// N -> s_peak Gamma tau exact by construction.
ObeResult obe_scattered_photons(const AtomSpecies& species, double pulse_peak_s,
                                double tau, double detuning,
                                bool record_states = false);

/// Steady-state excited population for constant saturation parameter s
/// (evaluated at the detuned s): rho_ee = s / (2 (1 + s)).
double steady_state_population(double s);

/// Multi-level/two-level N_scat ratio. Per m_F the potential weights each
/// line by strength/delta_F' and the scattering by strength/delta_F'^2, the
/// shared exp(-2 kappa z) profile cancels and the ratio reduces to
///   delta * sum(w/delta'^2) / sum(w/delta');
/// the result is averaged over m_F with equal populations.
double hyperfine_factor(const std::vector<HyperfineLine>& lines,
                        double detuning);

struct CorrectionToggles {
  bool obe = true;
  bool hyperfine = true;
  double roughness_offset = 0.0;  // recoils, added last
};

/// Full budget for one (delta, theta) point. The OBE stage uses the
/// pure-exponential pulse with peak saturation s = p_i^2/(M hbar delta)
/// (the turning-point value); its relative deficit multiplies the path
/// integral, then the hyperfine factor, then the empirical roughness offset.
ScatterBudget corrected_prediction(const AtomSpecies& species,
                                   const ew_optics::EwField& field,
                                   const mirror_potential::MirrorPotential& pot,
                                   double p_incident,
                                   const std::vector<HyperfineLine>& lines,
                                   const CorrectionToggles& toggles = {});

}  // namespace ewsim::photon_budget
