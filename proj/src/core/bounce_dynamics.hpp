#pragma once

#include <cstdint>
#include <vector>

#include "core/ew_optics.hpp"
#include "core/mirror_potential.hpp"
#include "core/photon_budget.hpp"
#include "core/rng.hpp"
#include "core/species.hpp"

namespace ewsim::bounce_dynamics {

/// Phase-space state of one atom. z is height above the prism surface along
/// the true surface normal; v_y is carried only for heating bookkeeping.
struct AtomState {
  double x = 0;
  double z = 0;
  double v_x = 0;
  double v_z = 0;
  double v_y = 0;
  double scattered = 0;  // accumulated photon number (mean or sampled)
};

/// Alignment imperfections of the idealized experiment; all default to zero.
struct Systematics {
  double prism_tilt = 0;               // rad
  double prism_tilt_uncertainty = 0;   // rad
  double mot_horizontal_offset = 0;    // m, MOT center relative to EW spot
  double launch_velocity = 0;          // m/s, added to initial v_x
  double launch_velocity_uncertainty = 0;
  double roughness_offset_recoils = 0;

  bool operator==(const Systematics&) const = default;
};

/// sqrt(2h/g).
double fall_time(double height);

struct IncidentMomentum {
  double momentum;    // kg m/s
  double recoils_k0;  // p_i / hbar k0
  double recoils_kx(double kx, const AtomSpecies& species) const;
};

/// p_i = M sqrt(2 g h) at the surface, with recoil-unit conversions.
IncidentMomentum incident_momentum(const AtomSpecies& species, double height);

struct TrajectorySample {
  double t;
  double z;
  double v_z;
  double n_scat;
};

struct IntegrateOptions {
  double dt_max = 0;             // 0 = unbounded
  double dz_max_frac = 1.0 / 50; // per-step dz cap in units of xi
  double step_tol = 1e-7;        // step-doubling error target (z/xi, v/v_in)
  double energy_tol = 1e-8;      // per-step relative energy drift guard
  bool record_trajectory = false;
  bool scattering = true;        // accumulate dN/dt = Gamma'(z(t))
};

struct BounceResult {
  AtomState state;               // outgoing state at the start height
  double duration = 0;           // time spent below the start height
  double n_scat = 0;             // mean scattered photons (two-level)
  double min_z = 0;
  double energy_in = 0;
  double energy_out = 0;
  double max_energy_drift = 0;   // max per-step |dE|/E
  long steps = 0;
  std::vector<TrajectorySample> trajectory;
};

/// Integrates one bounce with an adaptive velocity-Verlet scheme
/// (step-doubling error control, per-step dz cap, energy-drift guard),
/// accumulating the scattered-photon expectation along the path. The state
/// must start above the EW region moving downward; mean radiation pressure
/// (n_scat * hbar kx / M) is applied to v_x of the outgoing state.
BounceResult integrate_bounce(const AtomState& state,
                              const mirror_potential::MirrorPotential& pot,
                              const AtomSpecies& species,
                              const ew_optics::EwField& field,
                              const IntegrateOptions& opts = {});

/// Applies photon-recoil statistics for n_scat scattering events: the
/// absorbed momenta push v_x by n * hbar kx / M; each spontaneous emission
/// adds an isotropic recoil hbar k0 / M. Stochastic mode draws the event
/// count from Poisson(n_scat); deterministic mode applies means only (the
/// mean emission kick is zero).
AtomState apply_recoil_statistics(const AtomState& state, double n_scat,
                                  const ew_optics::EwField& field,
                                  const AtomSpecies& species, CounterRng* rng);

/// Post-bounce alignment effects: a prism tilt phi rotates the specular
/// reflection, changing the horizontal velocity by 2 |v_incident| sin phi
/// cos phi. (Launch velocity and MOT offset act on the initial conditions
/// and are consumed by the ensemble sampler.)
AtomState apply_systematics(const AtomState& state_out, const Systematics& sys,
                            double v_incident);

struct CloudConfig {
  AtomSpecies species;
  ew_optics::EwGeometry geometry;
  double detuning = 0;          // rad/s
  double fall_height = 6.6e-3;
  double temperature = 10e-6;   // K
  double mot_sigma = 0.3e-3;    // initial rms cloud radius per axis
  int atom_count = 10000;
  uint64_t seed = 1;
  Systematics systematics;
  bool include_vdw = true;
  double c3_scale = 1.0;
  bool stochastic_recoils = true;
  bool soft_mirror_edge = true; // per-atom local-barrier membership
  double recoil_scale = 1.0;    // correction factor applied to the two-level
                                // trajectory count (OBE x hyperfine)
  double roughness_offset = 0;  // recoils added per bounce
  double z_start_factor = 20;   // ODE switchover height in units of xi
  double step_tol = 1e-6;
  int threads = 0;              // 0 = hardware
  double max_time = 0.2;        // simulation horizon, s
};

/// Piecewise-ballistic representation of one atom's history.
struct BallisticSegment {
  double t0;
  double x, y, z;
  double v_x, v_y, v_z;
  double scattered = 0;  // cumulative photon count at segment start
};

struct AtomOutcome {
  std::vector<BallisticSegment> segments;
  double t_lost = -1;   // time the atom reached the surface (non-member)
  bool bounced = false;
  int bounce_count = 0;
  double scattered = 0;
  double v_x0 = 0;      // initial horizontal velocity (selection diagnostics)
  // transit windows (EW region crossings) for snapshot interpolation
  std::vector<std::pair<double, double>> transits;
};

struct CloudResult {
  std::vector<AtomOutcome> atoms;
  double bounce_fraction = 0;
  double mean_initial_vx_bounced = 0;
  double mean_n_scat = 0;
  ew_optics::EwField field;
};

/// State of atom `outcome` at time t (ballistic segments; linear
/// interpolation across the ~0.3 ms EW transit windows). Returns false once
/// the atom has been lost to the surface.
bool evaluate_atom(const AtomOutcome& outcome, double t, AtomState& out);

/// Seeds the ensemble (Gaussian MOT cloud + Maxwell-Boltzmann velocities),
/// free-falls every atom, tests mirror membership at the impact point via
/// the local barrier, integrates member bounces and applies recoils.
/// Deterministic for a fixed seed and atom count regardless of thread count.
CloudResult simulate_cloud(const CloudConfig& config);

/// CSV rows (t_ms, atom_id, x_m, z_m, vx_mps, vz_mps, scattered,
/// bounced_flag) for each snapshot time; lost atoms are omitted after loss.
std::string snapshots_csv(const CloudResult& result,
                          const std::vector<double>& times);

}  // namespace ewsim::bounce_dynamics
