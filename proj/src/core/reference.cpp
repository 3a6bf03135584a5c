#include "core/reference.hpp"

#include <chrono>
#include <cmath>
#include <functional>

#include "core/bounce_dynamics.hpp"
#include "core/constants.hpp"
#include "core/errors.hpp"
#include "core/io.hpp"
#include "core/pipeline.hpp"

namespace ewsim::reference {

using constants::two_pi;
namespace eo = ew_optics;
namespace mp = mirror_potential;
namespace pb = photon_budget;
namespace bd = bounce_dynamics;

namespace {

struct Check {
  bool pass = true;
  std::string detail;

  void within(const std::string& label, double computed, double expected,
              double tol) {
    const bool ok = std::abs(computed - expected) <= tol;
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += label + "=" + fmt_g(computed) + " (expect " + fmt_g(expected) +
              " +- " + fmt_g(tol) + (ok ? "" : " FAIL") + ")";
  }

  void below(const std::string& label, double computed, double bound) {
    const bool ok = computed <= bound;
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += label + "=" + fmt_g(computed) + " (<= " + fmt_g(bound) +
              (ok ? "" : " FAIL") + ")";
  }

  void truth(const std::string& label, bool ok) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += label + (ok ? "=ok" : "=FAIL");
  }
};

ExperimentConfig at_xi(const ExperimentConfig& base, double xi) {
  ExperimentConfig c = base;
  const AtomSpecies sp = c.species();
  c.angle_above_critical =
      eo::angle_from_decay_length(c.refractive_index, sp, xi) -
      eo::critical_angle(c.refractive_index);
  c.lens_displacement.reset();
  return c;
}

ExperimentConfig at_detuning_gamma(const ExperimentConfig& base, double gammas) {
  ExperimentConfig c = base;
  c.detuning = {gammas, DetuningUnit::Gamma};
  return c;
}

struct BudgetParts {
  AtomSpecies species;
  eo::EwField field;
  mp::MirrorPotential pot;  // gravity-free
  double p_incident;
};

BudgetParts parts(const ExperimentConfig& config, bool with_vdw) {
  BudgetParts p;
  p.species = config.species();
  const auto geom = config.geometry(p.species);
  p.field = eo::make_field(geom, p.species, config.detuning_angular(p.species));
  p.pot.u0 = p.field.u0;
  p.pot.kappa = p.field.decay_constant;
  p.pot.c3 = with_vdw ? config.c3_scale *
                            mp::default_c3(config.refractive_index, p.species)
                      : 0.0;
  p.pot.mg = p.species.mass * constants::g_earth;
  p.pot.include_gravity = false;
  p.pot.include_vdw = with_vdw;
  p.p_incident = bd::incident_momentum(p.species, config.fall_height).momentum;
  return p;
}

std::vector<double> default_times() {
  std::vector<double> t;
  for (int ms = 5; ms <= 95; ms += 10) t.push_back(ms * 1e-3);
  return t;
}

double linfit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double linfit_intercept(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return (sy - slope * sx) / n;
}

using RowFn = std::function<void(const ExperimentConfig&, Check&)>;

struct RowSpec {
  const char* name;
  const char* reference;
  RowFn fn;
};

// --- individual rows ----------------------------------------------------

void row_eq3(const ExperimentConfig& base, Check& ck) {
  const auto p = parts(at_xi(base, 2.8e-6), false);
  const double n = pb::nscat_analytic(p.species, p.field, p.p_incident);
  ck.within("N(44G, xi=2.8um)", n, 31.0, 1.0);
}

void row_calibration(const ExperimentConfig& base, Check& ck) {
  const AtomSpecies sp = base.species();
  const auto pi = bd::incident_momentum(sp, base.fall_height);
  ck.within("p_i/hbar_k0", pi.recoils_k0, 61.0, 0.5);
  ck.within("t_b_ms", bd::fall_time(base.fall_height) * 1e3, 36.7, 0.1);
}

void row_xi_table(const ExperimentConfig& base, Check& ck) {
  const AtomSpecies sp = base.species();
  const double thc = eo::critical_angle(base.refractive_index);
  const double mrad[3] = {0.9, 15.2, 24.0};
  const double xi_ref[3] = {2.8, 0.67, 0.53};
  for (int i = 0; i < 3; ++i) {
    eo::EwGeometry g = base.geometry(sp);
    g.angle = thc + mrad[i] * 1e-3;
    const auto prof = eo::decay_profile(g, sp);
    ck.within("xi(" + fmt_g(mrad[i]) + "mrad)_um", prof.xi * 1e6, xi_ref[i], 0.05);
  }
  const double list[6] = {1.87, 1.03, 0.79, 0.67, 0.59, 0.53};
  double max_err = 0;
  for (double xi_um : list) {
    const double th = eo::angle_from_decay_length(base.refractive_index, sp,
                                                  xi_um * 1e-6);
    eo::EwGeometry g = base.geometry(sp);
    g.angle = th;
    max_err = std::max(max_err,
                       std::abs(eo::decay_profile(g, sp).xi * 1e6 - xi_um));
  }
  ck.below("xi_roundtrip_um", max_err, 0.01);
}

void row_fresnel(const ExperimentConfig& base, Check& ck) {
  const double thc = eo::critical_angle(base.refractive_index);
  const AtomSpecies sp = base.species();
  eo::EwGeometry g = base.geometry(sp);
  g.angle = thc + 0.9e-3;
  const double t_hi = eo::enhancement_tm(g);
  g.angle = thc + 24.0e-3;
  const double t_lo = eo::enhancement_tm(g);
  ck.within("T(thc+0.9mrad)", t_hi, 6.0, 0.1);
  ck.within("T(thc+24mrad)", t_lo, 5.4, 0.1);
  bool monotone = true;
  double prev = t_hi;
  for (int i = 1; i <= 24; ++i) {
    g.angle = thc + 0.9e-3 + (24.0e-3 - 0.9e-3) * i / 24;
    const double t = eo::enhancement_tm(g);
    monotone = monotone && t < prev;
    prev = t;
  }
  ck.truth("monotone_decreasing", monotone);
}

void row_correction_vdw(const ExperimentConfig& base, Check& ck) {
  const auto cfg = at_xi(at_detuning_gamma(base, 44), 0.53e-6);
  const auto on = parts(cfg, true);
  const double n_path = pb::nscat_path_integral(on.species, on.field, on.pot,
                                                on.p_incident);
  const double n_two = pb::nscat_analytic(on.species, on.field, on.p_incident);
  const double excess_pct = (n_path / n_two - 1.0) * 100.0;
  ck.within("vdw_excess_pct", excess_pct, 0.8, 0.3);
  const double u0_over_e = on.pot.u0 / (on.p_incident * on.p_incident /
                                        (2.0 * on.species.mass));
  ck.detail += " [beam-center u0/E=" + fmt_g(u0_over_e) +
               "; the published 0.8% matches near-threshold u0/E~2.4, "
               "outside this operating point]";
}

void row_correction_hyperfine(const ExperimentConfig& base, Check& ck) {
  const AtomSpecies sp = base.species();
  const double f = pb::hyperfine_factor(pb::rb87_d2_pi_lines(),
                                        44.0 * sp.linewidth);
  ck.within("hyperfine_factor(44G)", f, 0.91, 0.02);
}

void row_correction_obe(const ExperimentConfig& base, Check& ck) {
  const auto p = parts(at_xi(at_detuning_gamma(base, 44), 0.67e-6), false);
  const double s_peak = p.p_incident * p.p_incident /
                        (p.species.mass * constants::hbar * p.field.detuning);
  const double tau = p.species.mass / (p.pot.kappa * p.p_incident);
  const auto obe = pb::obe_scattered_photons(p.species, s_peak, tau,
                                             p.field.detuning);
  ck.within("obe_deficit_pct", obe.deficit * 100.0, 7.0, 2.0);
}

void row_threshold_delta28(const ExperimentConfig& base, Check& ck) {
  const auto cfg = at_xi(base, 2.8e-6);
  const AtomSpecies sp = cfg.species();
  const double dth = mp::detuning_threshold(cfg.geometry(sp), sp, cfg.power,
                                            cfg.fall_height, cfg.c3_scale);
  ck.within("delta_th(2.8um)_GHz", dth / two_pi / 1e9, 6.5, 0.2 * 6.5);
  ck.detail += " [spec model: two-level beam-center barrier; 6.5 GHz is "
               "reproduced only with a 3/5 CG-weighted potential, see "
               "thresholds --sensitivity]";
}

void row_threshold_delta067(const ExperimentConfig& base, Check& ck) {
  const auto cfg = at_xi(base, 0.67e-6);
  const AtomSpecies sp = cfg.species();
  const double dth = mp::detuning_threshold(cfg.geometry(sp), sp, cfg.power,
                                            cfg.fall_height, cfg.c3_scale);
  ck.within("delta_th(0.67um)_GHz", dth / two_pi / 1e9, 8.1, 0.2 * 8.1);
}

void row_threshold_xi(const ExperimentConfig& base, Check& ck) {
  const AtomSpecies sp = base.species();
  const auto rep = mp::decay_length_threshold(
      base.geometry(sp), sp, base.power, 44.0 * sp.linewidth, base.fall_height,
      base.c3_scale);
  ck.within("xi_th(44G)_nm", rep.xi * 1e9, 116.0, 0.15 * 116.0);
}

void row_threshold_angle(const ExperimentConfig& base, Check& ck) {
  const AtomSpecies sp = base.species();
  const auto rep = mp::decay_length_threshold(
      base.geometry(sp), sp, base.power, 44.0 * sp.linewidth, base.fall_height,
      base.c3_scale);
  const double above = rep.angle - eo::critical_angle(base.refractive_index);
  ck.within("theta_th_minus_thc_rad", above, 0.59, 0.10 * 0.59);
}

ExperimentConfig pipeline_config(const ExperimentConfig& base, double gammas,
                                 double xi, int atoms) {
  ExperimentConfig c = at_xi(at_detuning_gamma(base, gammas), xi);
  c.atom_count = atoms;
  c.ccd.pixels = 400;  // keeps fast clouds inside the synthetic view
  c.ccd.photon_yield = 50;
  c.systematics = {};
  c.roughness_offset_recoils = 0;
  return c;
}

void row_power_independence(const ExperimentConfig& base, Check& ck) {
  std::vector<double> times;
  for (int ms = 5; ms <= 65; ms += 10) times.push_back(ms * 1e-3);
  for (double xi : {2.8e-6, 0.67e-6}) {
    ExperimentConfig c19 = pipeline_config(base, 31, xi, 30000);
    c19.power = 19e-3;
    ExperimentConfig c10 = c19;
    c10.power = 10.5e-3;

    const auto p19 = parts(c19, false);
    const auto p10 = parts(c10, false);
    const double n19 = pb::nscat_analytic(p19.species, p19.field, p19.p_incident);
    const double n10 = pb::nscat_analytic(p10.species, p10.field, p10.p_incident);
    ck.truth("n_twolevel_equal(xi=" + fmt_g(xi * 1e6) + "um)", n19 == n10);

    const auto r19 = pipeline::run_pipeline(c19, times);
    const auto r10 = pipeline::run_pipeline(c10, times);
    ck.truth("signal(xi=" + fmt_g(xi * 1e6) + ")",
             !r19.no_signal && !r10.no_signal);
    ck.below("pipeline_recoils_diff(xi=" + fmt_g(xi * 1e6) + "um)",
             std::abs(r19.fit.recoils - r10.fit.recoils), 2.0);
  }
}

void row_scaling(const ExperimentConfig& base, Check& ck) {
  // log-log slope of N vs delta over 31..233 Gamma.
  std::vector<double> lx, ly_two, ly_path;
  for (double g : {31.0, 60.0, 105.0, 160.0, 233.0}) {
    const auto p = parts(at_xi(at_detuning_gamma(base, g), 0.67e-6), true);
    lx.push_back(std::log(g));
    ly_two.push_back(
        std::log(pb::nscat_analytic(p.species, p.field, p.p_incident)));
    ly_path.push_back(std::log(
        pb::nscat_path_integral(p.species, p.field, p.pot, p.p_incident)));
  }
  ck.below("slope_twolevel_err", std::abs(linfit_slope(lx, ly_two) + 1.0), 1e-9);
  const double slope_path = linfit_slope(lx, ly_path);
  ck.truth("slope_pathintegral_in_[-1.02,-0.98]",
           slope_path >= -1.02 && slope_path <= -0.98);

  // N vs xi linear through the origin for the two-level model.
  std::vector<double> xs, ns;
  for (double xi : {0.5e-6, 1.0e-6, 1.5e-6, 2.0e-6, 2.8e-6}) {
    const auto p = parts(at_xi(at_detuning_gamma(base, 44), xi), false);
    xs.push_back(xi * 1e6);
    ns.push_back(pb::nscat_analytic(p.species, p.field, p.p_incident));
  }
  ck.below("xi_linear_intercept", std::abs(linfit_intercept(xs, ns)), 0.05);

  // u0-scale invariance (vdW off).
  const auto p = parts(at_xi(at_detuning_gamma(base, 44), 0.67e-6), false);
  const double n_ref = pb::nscat_path_integral(p.species, p.field, p.pot,
                                               p.p_incident);
  double max_rel = 0;
  for (double c : {0.5, 2.0, 10.0}) {
    mp::MirrorPotential pot = p.pot;
    pot.u0 *= c;
    const double n = pb::nscat_path_integral(p.species, p.field, pot,
                                             p.p_incident);
    max_rel = std::max(max_rel, std::abs(n / n_ref - 1.0));
  }
  ck.below("u0_invariance_rel", max_rel, 1e-6);
}

void row_closed_loop(const ExperimentConfig& base, Check& ck) {
  for (double xi : {2.8e-6, 0.67e-6, 0.53e-6}) {
    auto cfg = pipeline_config(base, 44, xi, base.atom_count);
    // The heated post-bounce cloud travels ~9 mm plus a ~3 mm spread by the
    // last frame; 800 px keeps it fully inside the synthetic view.
    cfg.ccd.pixels = 800;
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = pipeline::run_pipeline(cfg, default_times());
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    ck.truth("signal(xi=" + fmt_g(xi * 1e6) + "um)", !res.no_signal);
    ck.within("measured-truth(xi=" + fmt_g(xi * 1e6) + "um)",
              res.fit.recoils - res.truth.n_corrected, 0.0, 2.0);
    ck.below("runtime_s(xi=" + fmt_g(xi * 1e6) + "um)", secs, 120.0);
  }
}

void row_systematics_tilt(const ExperimentConfig& base, Check& ck) {
  // Paired control: the zero-tilt run with the identical seed isolates the
  // tilt artifact from the bounced subset's finite-sample velocity mean.
  ExperimentConfig cfg = at_xi(at_detuning_gamma(base, 44), 2.8e-6);
  cfg.atom_count = 20000;
  cfg.scattering_enabled = false;
  cfg.stochastic_recoils = false;
  cfg.ccd.noise = false;
  cfg.systematics.prism_tilt = 12e-3;
  cfg.systematics.prism_tilt_uncertainty = 5e-3;
  ExperimentConfig control = cfg;
  control.systematics.prism_tilt = 0;
  control.systematics.prism_tilt_uncertainty = 0;

  const auto res = pipeline::run_pipeline(cfg, default_times());
  const auto ref = pipeline::run_pipeline(control, default_times());
  ck.truth("signal", !res.no_signal && !ref.no_signal);
  if (!res.no_signal && !ref.no_signal) {
    const double artifact = res.fit_raw.recoils - ref.fit_raw.recoils;
    ck.within("tilt_artifact_recoils", artifact, 1.5, 0.1);
    ck.below("after_correction",
             std::abs(res.fit.recoils - ref.fit_raw.recoils), 0.05);
    const double inflation =
        std::sqrt(std::max(0.0, res.fit.recoils_err * res.fit.recoils_err -
                                    res.fit_raw.recoils_err * res.fit_raw.recoils_err));
    ck.within("correction_uncertainty", inflation, 0.6, 0.1);
  }
}

void row_oracle_equivalence(const ExperimentConfig& base, Check& ck) {
  double worst = 0;
  for (double g : {31.0, 60.0, 105.0, 160.0, 233.0}) {
    for (double xi : {2.8e-6, 1.87e-6, 1.03e-6, 0.67e-6, 0.53e-6}) {
      const auto p = parts(at_xi(at_detuning_gamma(base, g), xi), true);
      const double n_mom = pb::nscat_path_integral(p.species, p.field, p.pot,
                                                   p.p_incident);
      // Time-domain route through the same (gravity-free) potential.
      bd::AtomState in;
      in.z = 20.0 * xi;
      in.v_z = -p.p_incident / p.species.mass;
      bd::IntegrateOptions opts;
      opts.step_tol = 1e-8;
      const auto res = bd::integrate_bounce(in, p.pot, p.species, p.field, opts);
      worst = std::max(worst, std::abs(res.n_scat / n_mom - 1.0));
    }
  }
  ck.below("max_rel_diff_5x5", worst, 0.005);

  // Exponential bounce follows the sech^2 pulse shape.
  const auto p = parts(at_xi(at_detuning_gamma(base, 44), 0.67e-6), false);
  const double xi = 1.0 / p.pot.kappa;
  bd::AtomState in;
  in.z = 20.0 * xi;
  in.v_z = -p.p_incident / p.species.mass;
  bd::IntegrateOptions opts;
  opts.step_tol = 1e-10;
  opts.record_trajectory = true;
  const auto res = bd::integrate_bounce(in, p.pot, p.species, p.field, opts);
  const double e_in = 0.5 * p.species.mass * in.v_z * in.v_z + p.pot(in.z);
  const double v_e = std::sqrt(2.0 * e_in / p.species.mass);
  const double t0 = 0.5 * res.duration;
  double max_dev = 0;
  for (const auto& s : res.trajectory) {
    const double u = p.pot.u0 * std::exp(-2.0 * p.pot.kappa * s.z);
    if (u < 1e-3 * e_in) continue;
    const double sech = 1.0 / std::cosh(p.pot.kappa * v_e * (s.t - t0));
    max_dev = std::max(max_dev, std::abs(u / (e_in * sech * sech) - 1.0));
  }
  ck.below("sech2_max_rel_dev", max_dev, 1e-4);
}

void row_roughness(const ExperimentConfig& base, Check& ck) {
  auto intercept_with_offset = [&](double offset) {
    std::vector<double> xs, ns;
    for (double xi : {0.4e-6, 0.6e-6, 0.8e-6, 1.0e-6}) {
      const auto cfg = at_xi(at_detuning_gamma(base, 44), xi);
      const auto p = parts(cfg, true);
      pb::CorrectionToggles t;
      t.roughness_offset = offset;
      const auto b = pb::corrected_prediction(p.species, p.field, p.pot,
                                              p.p_incident,
                                              pb::rb87_d2_pi_lines(), t);
      xs.push_back(xi * 1e6);
      ns.push_back(b.n_corrected);
    }
    return linfit_intercept(xs, ns);
  };
  ck.within("small_xi_intercept(offset=3)", intercept_with_offset(3.0), 3.0, 0.15);
  ck.below("small_xi_intercept(offset=0)", std::abs(intercept_with_offset(0.0)), 0.1);
}

const RowSpec kRows[] = {
    {"eq3", "published upper end: 31 photon recoils at 44 Gamma, xi=2.8 um",
     row_eq3},
    {"calibration",
     "published fall calibration: p_i = 61 recoils, bounce at 36.7 ms",
     row_calibration},
    {"xi_table", "published decay lengths 2.8/0.67/0.53 um and angle list",
     row_xi_table},
    {"fresnel", "published TM enhancement range 5.4-6.0", row_fresnel},
    {"correction_vdw", "published vdW scattering excess ~0.8% at xi=0.53 um",
     row_correction_vdw},
    {"correction_hyperfine", "published multi-level reduction ~9% at 44 Gamma",
     row_correction_hyperfine},
    {"correction_obe", "published saturation deficit ~7% at 44 Gamma",
     row_correction_obe},
    {"thresholds_delta_2p8um", "published threshold 6.5 GHz at xi=2.8 um, 19 mW",
     row_threshold_delta28},
    {"thresholds_delta_0p67um", "published threshold 8.1 GHz at xi=0.67 um",
     row_threshold_delta067},
    {"thresholds_xi", "published decay-length limit 116 nm at 44 Gamma",
     row_threshold_xi},
    {"thresholds_angle", "published threshold angle theta_c + 0.59 rad",
     row_threshold_angle},
    {"power_independence",
     "published power independence: 25+-3 (13+-2) vs 23+-2 (11+-1) recoils",
     row_power_independence},
    {"scaling", "1/delta law, linear xi dependence, intensity independence",
     row_scaling},
    {"closed_loop", "simulated measurement recovers the predicted recoil number",
     row_closed_loop},
    {"systematics_tilt", "published tilt artifact 1.5+-0.6 recoils at 12 mrad",
     row_systematics_tilt},
    {"oracle_equivalence",
     "momentum-space vs time-domain scattering integrals; sech^2 pulse law",
     row_oracle_equivalence},
    {"roughness", "published empirical small-xi offset of ~3 recoils",
     row_roughness},
};

}  // namespace

std::vector<RowResult> run_verification(const ExperimentConfig& base,
                                        const std::string& filter) {
  base.validate();
  std::vector<RowResult> rows;
  for (const auto& spec : kRows) {
    if (!filter.empty() &&
        std::string(spec.name).find(filter) == std::string::npos) {
      continue;
    }
    RowResult row;
    row.name = spec.name;
    row.reference = spec.reference;
    Check ck;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      spec.fn(base, ck);
      row.pass = ck.pass;
      row.detail = ck.detail;
    } catch (const Error& e) {
      row.pass = false;
      row.detail = std::string("error: ") + e.what();
    }
    row.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string report(const std::vector<RowResult>& rows) {
  std::string out;
  for (const auto& row : rows) {
    out += (row.pass ? "PASS " : "FAIL ") + row.name + " [" +
           fmt_g(row.seconds) + " s]\n      " + row.reference + "\n      " +
           row.detail + "\n";
  }
  int passed = 0;
  for (const auto& row : rows) passed += row.pass ? 1 : 0;
  out += fmt_g(passed) + "/" + fmt_g(static_cast<double>(rows.size())) +
         " rows passed\n";
  return out;
}

bool all_passed(const std::vector<RowResult>& rows) {
  for (const auto& row : rows) {
    if (!row.pass) return false;
  }
  return !rows.empty();
}

}  // namespace ewsim::reference
