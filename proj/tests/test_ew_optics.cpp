#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/constants.hpp"
#include "core/ew_optics.hpp"
#include "core/species.hpp"
#include "core/units.hpp"

using namespace ewsim;
namespace eo = ewsim::ew_optics;
using constants::two_pi;

namespace {

const AtomSpecies kRb = rb87_d2();

eo::EwGeometry paper_geometry(double angle_above_critical_rad) {
  eo::EwGeometry g;
  g.refractive_index = 1.51;
  g.angle = eo::critical_angle(1.51) + angle_above_critical_rad;
  g.waist = 335e-6;
  g.power = 19e-3;
  g.polarization = eo::Polarization::TM;
  return g;
}

}  // namespace

TEST_CASE("species preset is internally consistent") {
  kRb.validate();
  CHECK(kRb.recoil_velocity == doctest::Approx(5.88e-3).epsilon(2e-3));
  CHECK(kRb.linewidth == doctest::Approx(two_pi * 6.0e6));
}

TEST_CASE("critical angle") {
  // n = 1.51 evaluates to 41.47 deg; the quoted 41.4 deg is rounded.
  CHECK(eo::critical_angle(1.51) ==
        doctest::Approx(41.4 * constants::pi / 180).epsilon(0.004));
  CHECK(eo::critical_angle(std::sqrt(2.0)) == doctest::Approx(constants::pi / 4));
  CHECK(eo::critical_angle(2.0) == doctest::Approx(constants::pi / 6));
  CHECK_THROWS_AS(eo::critical_angle(1.0), ConfigError);
  CHECK_THROWS_AS(eo::critical_angle(0.5), ConfigError);
}

TEST_CASE("decay profile reproduces the published decay lengths") {
  struct Row {
    double mrad, xi_um;
  };
  for (const Row row : {Row{0.9, 2.8}, Row{15.2, 0.67}, Row{24.0, 0.53}}) {
    const auto prof = eo::decay_profile(paper_geometry(row.mrad * 1e-3), kRb);
    CHECK(prof.xi * 1e6 == doctest::Approx(row.xi_um).epsilon(0.02));
    CHECK(prof.xi * prof.kappa == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(prof.kx > kRb.k0());  // strictly, since theta > theta_c
  }
  eo::EwGeometry sub = paper_geometry(0.9e-3);
  sub.angle = eo::critical_angle(1.51) - 1e-6;
  CHECK_THROWS_AS(eo::decay_profile(sub, kRb), ConfigError);
}

TEST_CASE("kappa is strictly increasing in theta and diverging xi near theta_c") {
  double prev_kappa = 0;
  for (int i = 1; i <= 40; ++i) {
    const auto prof = eo::decay_profile(paper_geometry(i * 1e-3), kRb);
    CHECK(prof.kappa > prev_kappa);
    prev_kappa = prof.kappa;
  }
  const auto close = eo::decay_profile(paper_geometry(1e-5), kRb);
  const auto far = eo::decay_profile(paper_geometry(1e-2), kRb);
  CHECK(close.xi > 20 * far.xi);
}

TEST_CASE("angle round-trips through kappa to 1e-12") {
  for (double mrad : {0.9, 5.0, 15.2, 24.0}) {
    const auto g = paper_geometry(mrad * 1e-3);
    const auto prof = eo::decay_profile(g, kRb);
    const double theta = eo::angle_from_kappa(1.51, kRb, prof.kappa);
    CHECK(theta == doctest::Approx(g.angle).epsilon(1e-12));
  }
}

TEST_CASE("telescope angle") {
  CHECK(eo::telescope_angle(0.0, 75e-3, 1.51) == 0.0);
  CHECK(eo::telescope_angle(0.102e-3, 75e-3, 1.51) ==
        doctest::Approx(0.9e-3).epsilon(2e-3));
  CHECK(eo::telescope_angle(2.72e-3, 75e-3, 1.51) ==
        doctest::Approx(24.0e-3).epsilon(2e-3));
  CHECK(eo::telescope_angle(-0.102e-3, 75e-3, 1.51) < 0);
  CHECK_THROWS_AS(eo::telescope_angle(1e-3, 0.0, 1.51), ConfigError);
}

TEST_CASE("TM enhancement covers the published 5.4-6.0 range") {
  CHECK(eo::enhancement_tm(paper_geometry(0.9e-3)) ==
        doctest::Approx(6.0).epsilon(0.01));
  CHECK(eo::enhancement_tm(paper_geometry(24.0e-3)) ==
        doctest::Approx(5.4).epsilon(0.01));
  // Continuity on a fine grid.
  double prev = eo::enhancement_tm(paper_geometry(0.1e-3));
  for (int i = 2; i <= 300; ++i) {
    const double t = eo::enhancement_tm(paper_geometry(0.1e-3 * i));
    CHECK(std::abs(t - prev) < 0.02);
    prev = t;
  }
}

TEST_CASE("TM/TE ratio approaches n^2 at the critical angle") {
  auto g = paper_geometry(0.1e-3);
  const double ratio = eo::enhancement_tm(g) / eo::enhancement_te(g);
  CHECK(ratio == doctest::Approx(1.51 * 1.51).epsilon(0.01));
  g.polarization = eo::Polarization::TE;
  CHECK_THROWS_AS(eo::enhancement_tm(g), ConfigError);
}

TEST_CASE("saturation parameter at the published operating point") {
  const auto g = paper_geometry(0.9e-3);
  const double delta = 44.0 * kRb.linewidth;
  const auto field = eo::make_field(g, kRb, delta);
  const double s0 = eo::saturation_parameter(field, kRb, 0.0, 0.0);
  // T(theta_c + 0.9 mrad) = 6.015 rather than exactly 6.0; 5.06 at T = 6.0.
  CHECK(s0 == doctest::Approx(5.1).epsilon(0.02));

  // Gaussian beam profile: r = w down by e^-2.
  const double sw = eo::saturation_parameter(field, kRb, 0.0, g.waist);
  CHECK(sw / s0 == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));

  // Exponential decay to (numerically) zero.
  CHECK(eo::saturation_parameter(field, kRb, 1.0, 0.0) == 0.0);
  CHECK_THROWS_AS(eo::make_field(g, kRb, 0.0), ConfigError);
}

TEST_CASE("dipole potential at the published operating point") {
  const auto g = paper_geometry(0.9e-3);
  const double delta = 44.0 * kRb.linewidth;
  const auto field = eo::make_field(g, kRb, delta);

  const double u0_freq = field.u0 / constants::hbar / two_pi;
  CHECK(u0_freq == doctest::Approx(670e6).epsilon(0.01));

  // Half-decay point.
  const double z_half = field.decay_length * std::log(2.0) / 2.0;
  CHECK(eo::dipole_potential(field, kRb, z_half, 0.0) ==
        doctest::Approx(field.u0 / 2).epsilon(1e-12));

  // Red detuning attracts.
  const auto red = eo::make_field(g, kRb, -delta);
  CHECK(red.u0 < 0);
  CHECK(eo::dipole_potential(red, kRb, 0.0, 0.0) < 0);
}

TEST_CASE("exponential factorization is exact") {
  const auto field = eo::make_field(paper_geometry(15.2e-3), kRb, 44 * kRb.linewidth);
  const double u_at_0 = eo::dipole_potential(field, kRb, 0.0, 0.0);
  for (double z : {0.1e-6, 0.5e-6, 2e-6, 10e-6}) {
    const double expected = std::exp(-2.0 * field.decay_constant * z);
    CHECK(eo::dipole_potential(field, kRb, z, 0.0) / u_at_0 ==
          doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("scattering rate identities") {
  const auto field = eo::make_field(paper_geometry(0.9e-3), kRb, 44 * kRb.linewidth);
  for (double z : {0.0, 0.3e-6, 1.7e-6}) {
    const double gp = eo::scattering_rate(field, kRb, z, 0.0);
    const double udip = eo::dipole_potential(field, kRb, z, 0.0);
    // Gamma' * hbar * delta = Gamma * U_dip, pointwise.
    CHECK(gp * constants::hbar * field.detuning ==
          doctest::Approx(kRb.linewidth * udip).epsilon(1e-13));
    const double s = eo::saturation_parameter(field, kRb, z, 0.0);
    CHECK(gp == doctest::Approx(s * kRb.linewidth / 2).epsilon(1e-13));
  }
  const double s0 = eo::saturation_parameter(field, kRb, 0.0, 0.0);
  CHECK(eo::scattering_rate(field, kRb, 0.0, 0.0) / kRb.linewidth ==
        doctest::Approx(s0 / 2).epsilon(1e-12));  // 2.55 Gamma at s0 = 5.1
}

TEST_CASE("detuning unit tags") {
  const Detuning in_gamma{44.0, DetuningUnit::Gamma};
  const Detuning in_mhz{264.0, DetuningUnit::MegaHertz};  // 44 x 6 MHz
  CHECK(in_gamma.to_angular(kRb) == doctest::Approx(in_mhz.to_angular(kRb)).epsilon(1e-14));
  CHECK(parse_detuning_unit("Gamma") == DetuningUnit::Gamma);
  CHECK(parse_detuning_unit("MHz") == DetuningUnit::MegaHertz);
  CHECK_THROWS_AS(parse_detuning_unit("GHz"), ConfigError);
}
