#include "core/bounce_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "core/constants.hpp"
#include "core/errors.hpp"
#include "core/parallel.hpp"

namespace ewsim::bounce_dynamics {

using constants::g_earth;
using constants::hbar;
using constants::k_boltzmann;

double fall_time(double height) {
  if (height < 0) throw ConfigError("fall time: height must be nonnegative");
  return std::sqrt(2.0 * height / g_earth);
}

IncidentMomentum incident_momentum(const AtomSpecies& species, double height) {
  if (height < 0) throw ConfigError("incident momentum: height must be nonnegative");
  IncidentMomentum out;
  out.momentum = species.mass * std::sqrt(2.0 * g_earth * height);
  out.recoils_k0 = out.momentum / (hbar * species.k0());
  return out;
}

double IncidentMomentum::recoils_kx(double kx, const AtomSpecies&) const {
  return momentum / (hbar * kx);
}

BounceResult integrate_bounce(const AtomState& state,
                              const mirror_potential::MirrorPotential& pot,
                              const AtomSpecies& species,
                              const ew_optics::EwField& field,
                              const IntegrateOptions& opts) {
  pot.validate();
  if (state.v_z >= 0) {
    throw ConfigError("integrate_bounce: atom must be moving downward");
  }
  const double xi = 1.0 / pot.kappa;
  if (state.z < 5.0 * xi) {
    throw ConfigError("integrate_bounce: start the integration above the EW region");
  }

  const double mass = species.mass;
  const double z_start = state.z;
  const double v_in = -state.v_z;
  const double rate_scale =
      opts.scattering ? species.linewidth / (hbar * field.detuning) * pot.u0 : 0.0;

  auto accel = [&](double z) { return -pot.derivative(z) / mass; };
  auto energy = [&](double z, double v) { return 0.5 * mass * v * v + pot(z); };
  auto rate = [&](double z) {
    return rate_scale * std::exp(-2.0 * pot.kappa * z);
  };

  // One velocity-Verlet step; returns false if it would dip below z_min.
  auto vv_step = [&](double& z, double& v, double& a, double h) {
    const double z1 = z + v * h + 0.5 * a * h * h;
    if (z1 < pot.z_min) return false;
    const double a1 = accel(z1);
    v += 0.5 * (a + a1) * h;
    z = z1;
    a = a1;
    return true;
  };

  BounceResult res;
  res.state = state;
  res.energy_in = energy(state.z, state.v_z);
  res.min_z = state.z;

  double z = state.z;
  double v = state.v_z;
  double a = accel(z);
  double t = 0;
  double n_scat = 0;
  double h = xi / (50.0 * v_in);

  if (opts.record_trajectory) res.trajectory.push_back({t, z, v, 0.0});

  const long kMaxSteps = 5'000'000;
  while (true) {
    if (++res.steps > kMaxSteps) {
      throw NumericError("integrate_bounce: step budget exhausted at z=" +
                         std::to_string(z));
    }
    double h_cap = opts.dt_max > 0 ? opts.dt_max : 1e300;
    const double v_for_cap = std::max(std::abs(v), 1e-3 * v_in);
    if (z < 12.0 * xi) {
      h_cap = std::min(h_cap, opts.dz_max_frac * xi / v_for_cap);
    }
    // Never jump by more than half the distance scale to the surface.
    h_cap = std::min(h_cap, 0.5 * std::max(z, xi) / v_for_cap);
    h = std::min(h, h_cap);

    // Full step and two half steps for the error estimate.
    double zf = z, vf = v, af = a;
    double zh = z, vh = v, ah = a;
    bool ok = vv_step(zf, vf, af, h);
    double zm = 0, vm = 0;
    if (ok) ok = vv_step(zh, vh, ah, 0.5 * h);
    if (ok) {
      zm = zh;
      vm = vh;
      ok = vv_step(zh, vh, ah, 0.5 * h);
    }

    // Worst offender across the position and energy criteria.
    double q = 0, e_err = 0;
    if (ok) {
      const double err = std::max(std::abs(zf - zh) / xi, std::abs(vf - vh) / v_in);
      // Energy error of the accepted (half-half) result, Richardson estimate.
      e_err = std::abs(energy(zf, vf) - energy(zh, vh)) / 3.0 /
              std::abs(res.energy_in);
      q = std::max(err / opts.step_tol, e_err / opts.energy_tol);
      if (!std::isfinite(q)) ok = false;
    }

    if (!ok || q > 1.0) {
      h *= ok ? std::clamp(0.9 * std::pow(q, -1.0 / 3.0), 0.1, 0.9) : 0.25;
      if (h < 1e-18) {
        throw NumericError("integrate_bounce: step size collapsed near the "
                           "vdW singularity, z reached = " + std::to_string(z));
      }
      continue;
    }

    // Accept the half-half result; Simpson accumulation of Gamma'(z(t)).
    if (opts.scattering) {
      n_scat += h / 6.0 * (rate(z) + 4.0 * rate(zm) + rate(zh));
    }
    z = zh;
    v = vh;
    a = ah;
    t += h;
    res.min_z = std::min(res.min_z, z);
    res.max_energy_drift = std::max(res.max_energy_drift, e_err);
    if (opts.record_trajectory) res.trajectory.push_back({t, z, v, n_scat});

    if (z >= z_start && v > 0) break;

    const double grow = q > 0 ? 0.9 * std::pow(q, -1.0 / 3.0) : 5.0;
    h *= std::clamp(grow, 0.2, 5.0);
  }

  // The final step may overshoot the start height; report the energy where
  // the integrator actually stopped and rewind the exit state along the
  // conservative free flight back to z_start.
  res.energy_out = energy(z, v);
  const double v_exit =
      std::sqrt(std::max(0.0, v * v + 2.0 * (pot(z) - pot(z_start)) / mass));
  t -= (v_exit - v) / (pot.include_gravity ? g_earth : 1e300) +
       (pot.include_gravity ? 0.0 : (z - z_start) / v);

  res.duration = t;
  res.n_scat = n_scat;
  res.state.z = z_start;
  res.state.v_z = v_exit;
  res.state.v_x = state.v_x + n_scat * hbar * field.kx / mass;
  res.state.scattered = state.scattered + n_scat;
  return res;
}

AtomState apply_recoil_statistics(const AtomState& state, double n_scat,
                                  const ew_optics::EwField& field,
                                  const AtomSpecies& species, CounterRng* rng) {
  if (n_scat < 0) throw ConfigError("recoil statistics: n_scat must be nonnegative");
  AtomState out = state;
  const double v_kx = hbar * field.kx / species.mass;
  if (rng == nullptr) {
    out.v_x += n_scat * v_kx;
    out.scattered += n_scat;
    return out;
  }
  const long n = rng->poisson(n_scat);
  out.v_x += n * v_kx;
  const double v_k0 = species.recoil_velocity;
  for (long i = 0; i < n; ++i) {
    const auto dir = rng->isotropic_direction();
    out.v_x += v_k0 * dir[0];
    out.v_y += v_k0 * dir[1];
    out.v_z += v_k0 * dir[2];
  }
  out.scattered += n;
  return out;
}

AtomState apply_systematics(const AtomState& state_out, const Systematics& sys,
                            double v_incident) {
  AtomState out = state_out;
  out.v_x += 2.0 * std::abs(v_incident) * std::sin(sys.prism_tilt) *
             std::cos(sys.prism_tilt);
  return out;
}

namespace {

// Time for a ballistic trajectory starting at (z0, vz) to reach z_target
// below it (z(t) = z0 + vz t - g t^2 / 2).
double time_to_fall(double z0, double vz, double z_target) {
  const double c = z0 - z_target;
  const double disc = vz * vz + 2.0 * g_earth * c;
  return (vz + std::sqrt(std::max(disc, 0.0))) / g_earth;
}

// Required beam-center u0 for the local barrier to reach energy e, tabulated
// once and interpolated per atom.
class MembershipTable {
public:
  MembershipTable(const mirror_potential::MirrorPotential& proto, double e_lo,
                  double e_hi, double u0_center) {
    e_lo_ = std::max(e_lo, 1e-3 * e_hi);
    e_hi_ = e_hi;
    table_.resize(kPoints);
    for (int i = 0; i < kPoints; ++i) {
      const double e = e_lo_ + (e_hi_ - e_lo_) * i / (kPoints - 1);
      table_[i] = required_u0(proto, e, u0_center);
    }
  }

  double required(double e) const {
    const double s = (e - e_lo_) / (e_hi_ - e_lo_) * (kPoints - 1);
    const int i = std::clamp(static_cast<int>(s), 0, kPoints - 2);
    const double f = std::clamp(s - i, 0.0, 1.0);
    return table_[i] * (1.0 - f) + table_[i + 1] * f;
  }

private:
  static double required_u0(mirror_potential::MirrorPotential pot, double e,
                            double u0_scale_hint) {
    auto bounces = [&](double u0) {
      pot.u0 = u0;
      return mirror_potential::barrier(pot, e).bounces;
    };
    double lo = e;  // pure optical barrier equals u0; vdW only lowers it
    double hi = std::max(4.0 * e, u0_scale_hint * 1e-6);
    while (!bounces(hi)) {
      hi *= 2.0;
      if (hi > 1e6 * e) {
        throw NumericError("membership table: no bouncing u0 found");
      }
    }
    if (bounces(lo)) return lo;
    for (int i = 0; i < 60; ++i) {
      const double mid = std::sqrt(lo * hi);
      (bounces(mid) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
  }

  static constexpr int kPoints = 64;
  double e_lo_, e_hi_;
  std::vector<double> table_;
};

}  // namespace

bool evaluate_atom(const AtomOutcome& outcome, double t, AtomState& out) {
  if (outcome.t_lost >= 0 && t >= outcome.t_lost) return false;

  // Inside an EW transit window: interpolate between the bracketing segments.
  for (size_t i = 0; i < outcome.transits.size(); ++i) {
    const auto [te, tx] = outcome.transits[i];
    if (t >= te && t < tx) {
      const auto& pre = outcome.segments[i];
      const auto& post = outcome.segments[i + 1];
      const double dt_pre = te - pre.t0;
      const double x_e = pre.x + pre.v_x * dt_pre;
      const double y_e = pre.y + pre.v_y * dt_pre;
      const double z_e = pre.z + pre.v_z * dt_pre - 0.5 * g_earth * dt_pre * dt_pre;
      const double f = (t - te) / (tx - te);
      out.x = x_e + (post.x - x_e) * f;
      out.z = z_e + (post.z - z_e) * f;
      out.v_x = f < 0.5 ? pre.v_x : post.v_x;
      out.v_z = f < 0.5 ? pre.v_z - g_earth * dt_pre : post.v_z;
      out.v_y = f < 0.5 ? pre.v_y : post.v_y;
      out.scattered = f < 0.5 ? pre.scattered : post.scattered;
      return true;
    }
  }

  const BallisticSegment* seg = &outcome.segments.front();
  for (size_t i = 1; i < outcome.segments.size(); ++i) {
    if (outcome.segments[i].t0 <= t) seg = &outcome.segments[i];
  }
  const double dt = t - seg->t0;
  out.x = seg->x + seg->v_x * dt;
  out.z = seg->z + seg->v_z * dt - 0.5 * g_earth * dt * dt;
  out.v_x = seg->v_x;
  out.v_y = seg->v_y;
  out.v_z = seg->v_z - g_earth * dt;
  out.scattered = seg->scattered;
  return true;
}

CloudResult simulate_cloud(const CloudConfig& config) {
  config.species.validate();
  config.geometry.validate();
  if (config.atom_count <= 0) throw ConfigError("simulate_cloud: atom count must be positive");
  if (config.detuning <= 0) throw ConfigError("simulate_cloud: blue detuning required");
  if (config.fall_height <= 0) throw ConfigError("simulate_cloud: fall height must be positive");

  const AtomSpecies& species = config.species;
  const auto field = ew_optics::make_field(config.geometry, species, config.detuning);
  const double kappa = field.decay_constant;
  const double xi = field.decay_length;
  const double mass = species.mass;
  const double z_sw = std::min(config.z_start_factor * xi, config.fall_height / 3.0);
  const double sigma_v = std::sqrt(k_boltzmann * config.temperature / mass);
  const double c3 = config.include_vdw
                        ? config.c3_scale * mirror_potential::default_c3(
                                                config.geometry.refractive_index, species)
                        : 0.0;

  mirror_potential::MirrorPotential proto;
  proto.kappa = kappa;
  proto.c3 = c3;
  proto.mg = mass * g_earth;
  proto.include_gravity = true;
  proto.include_vdw = config.include_vdw;
  proto.u0 = field.u0;

  // Membership: required beam-center u0 vs vertical energy, tabulated over
  // the thermal spread of arrival energies.
  const double e_nominal =
      mass * g_earth * config.fall_height;
  const double dv = 6.0 * sigma_v;
  const double v_nom = std::sqrt(2.0 * g_earth * (config.fall_height - z_sw));
  const double v_slow = std::max(0.0, v_nom - dv);
  const double e_lo = std::max(
      0.5 * mass * v_slow * v_slow + proto.mg * z_sw -
          proto.mg * 6.0 * config.mot_sigma,
      proto.mg * z_sw);
  const double e_hi = 0.5 * mass * (v_nom + dv) * (v_nom + dv) + proto.mg * z_sw +
                      proto.mg * 6.0 * config.mot_sigma;
  MembershipTable membership(proto, e_lo, e_hi, field.u0);

  double r_eff_sharp = 0;
  if (!config.soft_mirror_edge) {
    r_eff_sharp =
        mirror_potential::effective_mirror_radius(field, species, e_nominal, c3);
  }

  IntegrateOptions iopts;
  iopts.step_tol = config.step_tol;
  iopts.energy_tol = 1e-7;
  iopts.scattering = true;

  CloudResult result;
  result.field = field;
  result.atoms.resize(config.atom_count);

  parallel_chunks(config.atom_count, config.threads, [&](long lo, long hi) {
    for (long i = lo; i < hi; ++i) {
      AtomOutcome& atom = result.atoms[i];
      CounterRng pos_rng(config.seed, i, RngChannel::InitialPosition);
      CounterRng vel_rng(config.seed, i, RngChannel::InitialVelocity);
      CounterRng recoil_rng(config.seed, i, RngChannel::Recoil);

      BallisticSegment seg;
      seg.t0 = 0;
      seg.x = config.systematics.mot_horizontal_offset +
              config.mot_sigma * pos_rng.normal();
      seg.y = config.mot_sigma * pos_rng.normal();
      seg.z = config.fall_height + config.mot_sigma * pos_rng.normal();
      seg.v_x = config.systematics.launch_velocity + sigma_v * vel_rng.normal();
      seg.v_y = sigma_v * vel_rng.normal();
      seg.v_z = sigma_v * vel_rng.normal();
      atom.segments.push_back(seg);
      atom.v_x0 = seg.v_x;

      for (int bounce = 0; bounce < 8; ++bounce) {
        const BallisticSegment cur = atom.segments.back();
        const double tau_enter = time_to_fall(cur.z, cur.v_z, z_sw);
        const double t_enter = cur.t0 + tau_enter;
        if (t_enter > config.max_time) break;  // still in flight at horizon

        const double x_imp = cur.x + cur.v_x * tau_enter;
        const double y_imp = cur.y + cur.v_y * tau_enter;
        const double vz_sw = cur.v_z - g_earth * tau_enter;
        const double e_vert = 0.5 * mass * vz_sw * vz_sw + proto.mg * z_sw;
        const double r2 = x_imp * x_imp + y_imp * y_imp;
        const double u0_local =
            field.u0 * std::exp(-2.0 * r2 / (field.waist * field.waist));

        const bool member =
            config.soft_mirror_edge
                ? u0_local >= membership.required(e_vert)
                : std::sqrt(r2) <= r_eff_sharp;

        if (!member) {
          atom.t_lost = t_enter + time_to_fall(z_sw, vz_sw, 0.0);
          break;
        }

        mirror_potential::MirrorPotential pot = proto;
        pot.u0 = u0_local;

        AtomState in;
        in.x = x_imp;
        in.z = z_sw;
        in.v_x = cur.v_x;
        in.v_y = cur.v_y;
        in.v_z = vz_sw;

        BounceResult bres;
        try {
          bres = integrate_bounce(in, pot, species, field, iopts);
        } catch (const Error&) {
          // Marginal member straddling the interpolated threshold.
          atom.t_lost = t_enter + time_to_fall(z_sw, vz_sw, 0.0);
          break;
        }

        const double n_eff =
            bres.n_scat * config.recoil_scale + config.roughness_offset;

        AtomState out = in;
        out.v_z = bres.state.v_z;
        out = apply_recoil_statistics(
            out, n_eff, field, species,
            config.stochastic_recoils ? &recoil_rng : nullptr);
        // Tilt acts on the full reflection speed at the mirror.
        const double v_surface = std::sqrt(vz_sw * vz_sw + 2.0 * g_earth * z_sw);
        out = apply_systematics(out, config.systematics, v_surface);

        atom.bounced = true;
        atom.bounce_count += 1;
        atom.scattered += out.scattered;

        BallisticSegment next;
        next.t0 = t_enter + bres.duration;
        next.x = x_imp + cur.v_x * bres.duration +
                 0.5 * (out.v_x - cur.v_x) * bres.duration;
        next.y = y_imp + cur.v_y * bres.duration;
        next.z = z_sw;
        next.v_x = out.v_x;
        next.v_y = out.v_y;
        next.v_z = out.v_z;
        next.scattered = atom.scattered;
        atom.transits.emplace_back(t_enter, next.t0);
        atom.segments.push_back(next);
      }
    }
  });

  long bounced = 0;
  double vx0_sum = 0, n_sum = 0;
  for (const auto& atom : result.atoms) {
    if (atom.bounced) {
      ++bounced;
      vx0_sum += atom.v_x0;
      n_sum += atom.scattered;
    }
  }
  result.bounce_fraction = static_cast<double>(bounced) / config.atom_count;
  result.mean_initial_vx_bounced = bounced ? vx0_sum / bounced : 0.0;
  result.mean_n_scat = bounced ? n_sum / bounced : 0.0;
  return result;
}

std::string snapshots_csv(const CloudResult& result,
                          const std::vector<double>& times) {
  std::string csv = "t_ms,atom_id,x_m,z_m,vx_mps,vz_mps,scattered,bounced_flag\n";
  char buf[256];
  for (double t : times) {
    for (size_t i = 0; i < result.atoms.size(); ++i) {
      AtomState s;
      if (!evaluate_atom(result.atoms[i], t, s)) continue;
      const bool bounced_by_now =
          result.atoms[i].bounced && !result.atoms[i].transits.empty() &&
          t >= result.atoms[i].transits.front().second;
      std::snprintf(buf, sizeof(buf), "%.6g,%zu,%.10g,%.10g,%.10g,%.10g,%.10g,%d\n",
                    t * 1e3, i, s.x, s.z, s.v_x, s.v_z, s.scattered,
                    bounced_by_now ? 1 : 0);
      csv += buf;
    }
  }
  return csv;
}

}  // namespace ewsim::bounce_dynamics
