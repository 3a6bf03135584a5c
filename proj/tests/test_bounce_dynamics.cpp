#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "core/bounce_dynamics.hpp"
#include "core/constants.hpp"
#include "core/ew_optics.hpp"
#include "core/mirror_potential.hpp"
#include "core/photon_budget.hpp"
#include "core/rng.hpp"
#include "core/species.hpp"

using namespace ewsim;
namespace eo = ewsim::ew_optics;
namespace mp = ewsim::mirror_potential;
namespace pb = ewsim::photon_budget;
namespace bd = ewsim::bounce_dynamics;
using constants::g_earth;
using constants::hbar;
using constants::k_boltzmann;

namespace {

const AtomSpecies kRb = rb87_d2();

eo::EwGeometry geometry_at_xi(double xi) {
  eo::EwGeometry g;
  g.refractive_index = 1.51;
  g.angle = eo::angle_from_decay_length(1.51, kRb, xi);
  g.waist = 335e-6;
  g.power = 19e-3;
  return g;
}

struct Setup {
  eo::EwField field;
  mp::MirrorPotential pot;
};

Setup setup_at(double xi, double delta_gammas, bool vdw, bool gravity) {
  Setup s;
  s.field = eo::make_field(geometry_at_xi(xi), kRb, delta_gammas * kRb.linewidth);
  s.pot.u0 = s.field.u0;
  s.pot.kappa = s.field.decay_constant;
  s.pot.c3 = vdw ? mp::default_c3(1.51, kRb) : 0.0;
  s.pot.mg = kRb.mass * g_earth;
  s.pot.include_gravity = gravity;
  s.pot.include_vdw = vdw;
  return s;
}

bd::CloudConfig paper_cloud(int atoms, uint64_t seed) {
  bd::CloudConfig c;
  c.species = kRb;
  c.geometry = geometry_at_xi(2.8e-6);
  c.detuning = 44 * kRb.linewidth;
  c.atom_count = atoms;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("fall time") {
  CHECK(bd::fall_time(6.6e-3) * 1e3 == doctest::Approx(36.7).epsilon(0.003));
  CHECK(bd::fall_time(0.0) == 0.0);
  CHECK(bd::fall_time(4 * 6.6e-3) == doctest::Approx(2 * bd::fall_time(6.6e-3)));
  CHECK_THROWS_AS(bd::fall_time(-1e-3), ConfigError);
}

TEST_CASE("incident momentum in recoil units") {
  const auto pi = bd::incident_momentum(kRb, 6.6e-3);
  CHECK(pi.recoils_k0 == doctest::Approx(61.0).epsilon(0.005));
  const double kx = eo::decay_profile(geometry_at_xi(2.8e-6), kRb).kx;
  const double n_sin = kx / kRb.k0();
  CHECK(pi.recoils_kx(kx, kRb) == doctest::Approx(pi.recoils_k0 / n_sin));
  CHECK(pi.recoils_kx(kx, kRb) < pi.recoils_k0);
  CHECK(bd::incident_momentum(kRb, 6.6e-3 / 4).momentum ==
        doctest::Approx(pi.momentum / 2).epsilon(1e-12));
}

TEST_CASE("elastic bounce conserves energy and reverses the velocity") {
  const auto s = setup_at(0.67e-6, 44, true, true);
  bd::AtomState in;
  in.z = 20.0 / s.pot.kappa;
  in.v_z = -std::sqrt(2.0 * g_earth * 6.6e-3);
  bd::IntegrateOptions opts;
  opts.scattering = false;
  const auto res = bd::integrate_bounce(in, s.pot, kRb, s.field, opts);
  CHECK(std::abs(res.energy_out / res.energy_in - 1.0) < 1e-6);
  CHECK(res.state.v_z == doctest::Approx(-in.v_z).epsilon(1e-6));
  CHECK(res.n_scat == 0.0);
  CHECK(res.min_z > 0);
  CHECK(res.state.z == in.z);
}

TEST_CASE("time reversal retraces the incoming trajectory") {
  const auto s = setup_at(1.03e-6, 44, true, true);
  bd::AtomState in;
  in.z = 20.0 / s.pot.kappa;
  in.v_z = -0.35;
  bd::IntegrateOptions opts;
  opts.scattering = false;
  opts.step_tol = 1e-8;
  const auto fwd = bd::integrate_bounce(in, s.pot, kRb, s.field, opts);
  bd::AtomState back = fwd.state;
  back.v_z = -fwd.state.v_z;
  const auto rev = bd::integrate_bounce(back, s.pot, kRb, s.field, opts);
  CHECK(rev.state.v_z == doctest::Approx(-in.v_z).epsilon(1e-7));
  CHECK(rev.duration == doctest::Approx(fwd.duration).epsilon(1e-6));
  CHECK(rev.min_z == doctest::Approx(fwd.min_z).epsilon(1e-6));
}

TEST_CASE("pure exponential bounce follows the sech^2 pulse") {
  const auto s = setup_at(0.67e-6, 44, false, false);
  bd::AtomState in;
  in.z = 20.0 / s.pot.kappa;
  in.v_z = -std::sqrt(2.0 * g_earth * 6.6e-3);
  bd::IntegrateOptions opts;
  opts.step_tol = 1e-10;
  opts.record_trajectory = true;
  const auto res = bd::integrate_bounce(in, s.pot, kRb, s.field, opts);
  const double e_in = res.energy_in;
  const double v_e = std::sqrt(2.0 * e_in / kRb.mass);
  const double t0 = res.duration / 2;
  double worst = 0;
  for (const auto& sample : res.trajectory) {
    const double u = s.pot.u0 * std::exp(-2.0 * s.pot.kappa * sample.z);
    if (u < 1e-3 * e_in) continue;
    const double sech = 1.0 / std::cosh(s.pot.kappa * v_e * (sample.t - t0));
    worst = std::max(worst, std::abs(u / (e_in * sech * sech) - 1.0));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("accumulated photons match the momentum-space integral") {
  const auto s = setup_at(0.53e-6, 44, true, true);
  const double p_i = bd::incident_momentum(kRb, 6.6e-3).momentum;
  bd::AtomState in;
  in.z = 20.0 / s.pot.kappa;
  // Match total energy between the gravity-on trajectory and the
  // gravity-free momentum mapping.
  const double e_target = p_i * p_i / (2 * kRb.mass);
  in.v_z = -std::sqrt(2.0 * (e_target - s.pot(in.z)) / kRb.mass);
  const auto res = bd::integrate_bounce(in, s.pot, kRb, s.field, {});

  auto pot_nograv = s.pot;
  pot_nograv.include_gravity = false;
  const double n_quad = pb::nscat_path_integral(kRb, s.field, pot_nograv, p_i);
  CHECK(res.n_scat == doctest::Approx(n_quad).epsilon(5e-3));
  // Mean radiation pressure pushes v_x, not v_z.
  CHECK(res.state.v_x ==
        doctest::Approx(res.n_scat * hbar * s.field.kx / kRb.mass).epsilon(1e-9));
}

TEST_CASE("integrate_bounce input validation") {
  const auto s = setup_at(0.67e-6, 44, true, true);
  bd::AtomState up;
  up.z = 20.0 / s.pot.kappa;
  up.v_z = +0.1;
  CHECK_THROWS_AS(bd::integrate_bounce(up, s.pot, kRb, s.field, {}), ConfigError);
  bd::AtomState low;
  low.z = 1.0 / s.pot.kappa;
  low.v_z = -0.1;
  CHECK_THROWS_AS(bd::integrate_bounce(low, s.pot, kRb, s.field, {}), ConfigError);
}

TEST_CASE("recoil statistics: deterministic and stochastic moments") {
  const auto s = setup_at(0.67e-6, 44, false, false);
  bd::AtomState atom;

  const auto same = bd::apply_recoil_statistics(atom, 0.0, s.field, kRb, nullptr);
  CHECK(same.v_x == 0.0);
  CHECK(same.scattered == 0.0);

  const double n_mean = 6.3;
  const double v_kx = hbar * s.field.kx / kRb.mass;
  const auto det = bd::apply_recoil_statistics(atom, n_mean, s.field, kRb, nullptr);
  CHECK(det.v_x == doctest::Approx(n_mean * v_kx).epsilon(1e-12));
  CHECK(det.v_z == 0.0);

  const long kSamples = 100000;
  double sum = 0, sum2 = 0, sum_z2 = 0;
  for (long i = 0; i < kSamples; ++i) {
    CounterRng rng(99, i, RngChannel::Recoil);
    const auto out = bd::apply_recoil_statistics(atom, n_mean, s.field, kRb, &rng);
    sum += out.v_x;
    sum2 += out.v_x * out.v_x;
    sum_z2 += out.v_z * out.v_z;
  }
  const double mean = sum / kSamples;
  const double var = sum2 / kSamples - mean * mean;
  const double v_k0 = kRb.recoil_velocity;
  const double var_expected = n_mean * v_kx * v_kx + n_mean * v_k0 * v_k0 / 3.0;
  const double mean_se = std::sqrt(var_expected / kSamples);
  CHECK(std::abs(mean - n_mean * v_kx) < 5.0 * mean_se);
  CHECK(var == doctest::Approx(var_expected).epsilon(0.05));
  // Isotropic emission heats the vertical axis by n (hbar k0 / M)^2 / 3.
  CHECK(sum_z2 / kSamples ==
        doctest::Approx(n_mean * v_k0 * v_k0 / 3.0).epsilon(0.05));
}

TEST_CASE("prism tilt rotates the reflection") {
  bd::Systematics sys;
  sys.prism_tilt = 12e-3;
  bd::AtomState out;
  const double v_i = std::sqrt(2.0 * g_earth * 6.6e-3);
  const auto kicked = bd::apply_systematics(out, sys, v_i);
  const double kx = eo::decay_profile(geometry_at_xi(2.8e-6), kRb).kx;
  const double recoils = kicked.v_x / (hbar * kx / kRb.mass);
  CHECK(recoils == doctest::Approx(1.466).epsilon(2e-3));
  sys.prism_tilt = 0;
  CHECK(bd::apply_systematics(out, sys, v_i).v_x == out.v_x);
}

TEST_CASE("cloud sampling reproduces the Maxwell-Boltzmann variance") {
  auto cfg = paper_cloud(20000, 7);
  const auto cloud = bd::simulate_cloud(cfg);
  double s2 = 0, mean = 0;
  for (const auto& atom : cloud.atoms) {
    mean += atom.segments[0].v_x;
  }
  mean /= cloud.atoms.size();
  for (const auto& atom : cloud.atoms) {
    const double d = atom.segments[0].v_x - mean;
    s2 += d * d;
  }
  s2 /= (cloud.atoms.size() - 1);
  const double expected = k_boltzmann * cfg.temperature / kRb.mass;
  const double se = expected * std::sqrt(2.0 / (cloud.atoms.size() - 1));
  CHECK(std::abs(s2 - expected) < 5.0 * se);
}

TEST_CASE("bounce fraction is of the published order") {
  const auto cloud = bd::simulate_cloud(paper_cloud(20000, 1));
  CHECK(cloud.bounce_fraction > 0.03);
  CHECK(cloud.bounce_fraction < 0.20);  // order of the published 13%
}

TEST_CASE("cloud determinism across thread counts and runs") {
  auto cfg = paper_cloud(3000, 42);
  cfg.threads = 1;
  const auto a = bd::simulate_cloud(cfg);
  cfg.threads = 4;
  const auto b = bd::simulate_cloud(cfg);
  REQUIRE(a.atoms.size() == b.atoms.size());
  for (size_t i = 0; i < a.atoms.size(); ++i) {
    REQUIRE(a.atoms[i].segments.size() == b.atoms[i].segments.size());
    CHECK(a.atoms[i].scattered == b.atoms[i].scattered);
    for (size_t k = 0; k < a.atoms[i].segments.size(); ++k) {
      CHECK(a.atoms[i].segments[k].x == b.atoms[i].segments[k].x);
      CHECK(a.atoms[i].segments[k].v_x == b.atoms[i].segments[k].v_x);
      CHECK(a.atoms[i].segments[k].t0 == b.atoms[i].segments[k].t0);
    }
  }
}

TEST_CASE("horizontal motion is uniform between bounces") {
  const auto cloud = bd::simulate_cloud(paper_cloud(200, 3));
  const auto& atom = cloud.atoms[0];
  bd::AtomState s1, s2, s3;
  REQUIRE(bd::evaluate_atom(atom, 5e-3, s1));
  REQUIRE(bd::evaluate_atom(atom, 15e-3, s2));
  REQUIRE(bd::evaluate_atom(atom, 30e-3, s3));
  const double v1 = (s2.x - s1.x) / 10e-3;
  const double v2 = (s3.x - s2.x) / 15e-3;
  CHECK(v1 == doctest::Approx(v2).epsilon(1e-12));
  CHECK(v1 == doctest::Approx(atom.segments[0].v_x).epsilon(1e-12));
}

TEST_CASE("post-bounce horizontal velocity matches the corrected budget") {
  auto cfg = paper_cloud(40000, 11);
  cfg.recoil_scale = 0.85;  // stand-in for obe x hyperfine
  cfg.stochastic_recoils = true;
  const auto cloud = bd::simulate_cloud(cfg);

  auto pot = mp::MirrorPotential{};
  pot.u0 = cloud.field.u0;
  pot.kappa = cloud.field.decay_constant;
  pot.c3 = mp::default_c3(1.51, kRb);
  pot.mg = kRb.mass * g_earth;
  pot.include_gravity = false;
  const double p_i = bd::incident_momentum(kRb, cfg.fall_height).momentum;
  const double n_truth =
      pb::nscat_path_integral(kRb, cloud.field, pot, p_i) * cfg.recoil_scale;

  double dvx = 0;
  long count = 0;
  for (const auto& atom : cloud.atoms) {
    if (!atom.bounced || atom.bounce_count != 1) continue;
    dvx += atom.segments[1].v_x - atom.segments[0].v_x;
    ++count;
  }
  REQUIRE(count > 1000);
  const double v_kx = hbar * cloud.field.kx / kRb.mass;
  const double measured_n = dvx / count / v_kx;
  // 5 sigma window on the ensemble mean (Poisson + emission heating).
  const double se = std::sqrt(n_truth + n_truth / 3.0) / std::sqrt((double)count);
  CHECK(std::abs(measured_n - n_truth) < 5.0 * se);
}

TEST_CASE("off-center mirror selects a nonzero horizontal velocity") {
  auto cfg = paper_cloud(30000, 5);
  cfg.systematics.mot_horizontal_offset = 1e-3;
  const auto cloud = bd::simulate_cloud(cfg);
  CHECK(cloud.bounce_fraction > 0);
  // MOT displaced to +x: bouncing atoms preferentially carry v_x < 0.
  CHECK(cloud.mean_initial_vx_bounced < 0);

  cfg.systematics.mot_horizontal_offset = 2e-3;
  const auto further = bd::simulate_cloud(cfg);
  CHECK(further.mean_initial_vx_bounced < cloud.mean_initial_vx_bounced);
  CHECK(further.bounce_fraction < cloud.bounce_fraction);
}

TEST_CASE("second bounces occur for slow spreading clouds") {
  auto cfg = paper_cloud(5000, 17);
  cfg.recoil_scale = 0.0;  // elastic: second impacts stay near the mirror
  cfg.stochastic_recoils = false;
  cfg.max_time = 0.25;
  const auto cloud = bd::simulate_cloud(cfg);
  int rebounced = 0;
  for (const auto& atom : cloud.atoms) rebounced += atom.bounce_count >= 2;
  CHECK(rebounced >= 1);
}

TEST_CASE("snapshot CSV schema") {
  auto cfg = paper_cloud(50, 2);
  const auto cloud = bd::simulate_cloud(cfg);
  const auto csv = bd::snapshots_csv(cloud, {5e-3, 45e-3});
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t_ms,atom_id,x_m,z_m,vx_mps,vz_mps,scattered,bounced_flag");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    int commas = 0;
    for (char ch : line) commas += ch == ',';
    CHECK(commas == 7);
    ++rows;
  }
  CHECK(rows > 50);         // 5 ms snapshot holds all 50 atoms
  CHECK(rows < 2 * 50 + 1); // some are lost to the surface by 45 ms
}
