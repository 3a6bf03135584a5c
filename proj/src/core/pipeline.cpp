#include "core/pipeline.hpp"

#include <cmath>

#include "core/bounce_dynamics.hpp"
#include "core/constants.hpp"
#include "core/errors.hpp"
#include "core/io.hpp"

namespace ewsim::pipeline {

using constants::g_earth;
using constants::k_boltzmann;
using constants::two_pi;

namespace {

struct Point {
  AtomSpecies species;
  ew_optics::EwGeometry geometry;
  double delta = 0;
  ew_optics::EwField field;
  mirror_potential::MirrorPotential pot_budget;    // gravity-free, for Eq. 2
  mirror_potential::MirrorPotential pot_membership;  // gravity on
  double p_incident = 0;
  double e_incident = 0;
};

Point make_point(const ExperimentConfig& config) {
  Point p;
  p.species = config.species();
  p.geometry = config.geometry(p.species);
  p.delta = config.detuning_angular(p.species);
  p.field = ew_optics::make_field(p.geometry, p.species, p.delta);

  const double c3 =
      config.correction_vdw
          ? config.c3_scale *
                mirror_potential::default_c3(config.refractive_index, p.species)
          : 0.0;

  p.pot_budget.u0 = p.field.u0;
  p.pot_budget.kappa = p.field.decay_constant;
  p.pot_budget.c3 = c3;
  p.pot_budget.mg = p.species.mass * g_earth;
  p.pot_budget.include_gravity = false;
  p.pot_budget.include_vdw = config.correction_vdw;

  p.pot_membership = p.pot_budget;
  p.pot_membership.include_gravity = true;

  p.p_incident =
      bounce_dynamics::incident_momentum(p.species, config.fall_height).momentum;
  p.e_incident = p.species.mass * g_earth * config.fall_height;
  return p;
}

photon_budget::CorrectionToggles toggles_of(const ExperimentConfig& config) {
  photon_budget::CorrectionToggles t;
  t.obe = config.correction_obe;
  t.hyperfine = config.correction_hyperfine;
  t.roughness_offset = config.roughness_offset_recoils;
  return t;
}

}  // namespace

BudgetRow predict(const ExperimentConfig& config) {
  config.validate();
  const Point p = make_point(config);

  BudgetRow row;
  row.delta_over_gamma = p.delta / p.species.linewidth;
  row.xi_um = p.field.decay_length * 1e6;

  const auto rep = mirror_potential::barrier(p.pot_membership, p.e_incident);
  row.bounces = rep.bounces;
  if (!row.bounces) {
    std::string hint;
    try {
      const double dth = mirror_potential::detuning_threshold(
          p.geometry, p.species, p.geometry.power, config.fall_height,
          config.c3_scale);
      hint = "; threshold hint: delta_th = " + fmt_g(dth / two_pi / 1e9) +
             " GHz at this geometry";
    } catch (const Error&) {
      hint = "; no bouncing detuning exists at this geometry";
    }
    throw NoBounceError("configuration does not bounce (barrier " +
                        fmt_g(rep.barrier_height) + " J < E " +
                        fmt_g(p.e_incident) + " J)" + hint);
  }

  row.budget = photon_budget::corrected_prediction(
      p.species, p.field, p.pot_budget, p.p_incident,
      photon_budget::rb87_d2_pi_lines(), toggles_of(config));
  return row;
}

std::string budget_csv_header() {
  return "delta_over_Gamma,xi_um,n_twolevel,n_pathintegral,n_obe,"
         "hyperfine_factor,n_corrected\n";
}

std::string budget_csv_row(const BudgetRow& row) {
  const auto& b = row.budget;
  return fmt_g(row.delta_over_gamma) + "," + fmt_g(row.xi_um) + "," +
         fmt_g(b.n_twolevel) + "," + fmt_g(b.n_pathintegral) + "," +
         fmt_g(b.n_obe) + "," + fmt_g(b.hyperfine_factor) + "," +
         fmt_g(b.n_corrected) + "\n";
}

std::string sweep_csv(const ExperimentConfig& config, const std::string& axis,
                      double from, double to, int points) {
  if (points < 1) throw ConfigError("sweep: points must be >= 1");
  if (axis != "detuning" && axis != "angle") {
    throw ConfigError("sweep axis must be 'detuning' or 'angle'");
  }

  std::string csv = budget_csv_header();
  for (int i = 0; i < points; ++i) {
    const double v =
        points == 1 ? from : from + (to - from) * i / (points - 1);
    ExperimentConfig c = config;
    if (axis == "detuning") {
      c.detuning.value = v;
    } else {
      c.angle_above_critical = v * 1e-3;  // mrad above theta_c
      c.lens_displacement.reset();
    }
    try {
      csv += budget_csv_row(predict(c));
    } catch (const NoBounceError&) {
      const Point p = make_point(c);
      csv += fmt_g(p.delta / p.species.linewidth) + "," +
             fmt_g(p.field.decay_length * 1e6) + ",nan,nan,nan,nan,nan\n";
    }
  }
  return csv;
}

ThresholdsReport thresholds(const ExperimentConfig& config) {
  config.validate();
  const Point p = make_point(config);

  ThresholdsReport rep;
  rep.delta_th = mirror_potential::detuning_threshold(
      p.geometry, p.species, p.geometry.power, config.fall_height, config.c3_scale);
  const auto xi_rep = mirror_potential::decay_length_threshold(
      p.geometry, p.species, p.geometry.power, p.delta, config.fall_height,
      config.c3_scale);
  rep.xi_th = xi_rep.xi;
  rep.angle_th = xi_rep.angle;
  rep.r_eff = mirror_potential::effective_mirror_radius(
      p.field, p.species, p.e_incident, p.pot_membership.c3);

  const double tb = bounce_dynamics::fall_time(config.fall_height);
  const double sigma_v = std::sqrt(k_boltzmann * config.temperature / p.species.mass);
  const double sigma = std::hypot(config.mot_sigma, sigma_v * tb);
  rep.fraction = mirror_potential::bounce_fraction(
      sigma, config.systematics.mot_horizontal_offset, rep.r_eff);
  return rep;
}

std::string thresholds_csv(const ExperimentConfig& config, bool with_sensitivity) {
  const ThresholdsReport rep = thresholds(config);
  std::string csv = "delta_th_GHz,xi_th_nm,r_eff_m,fraction\n";
  csv += fmt_g(rep.delta_th / two_pi / 1e9) + "," + fmt_g(rep.xi_th * 1e9) +
         "," + fmt_g(rep.r_eff) + "," + fmt_g(rep.fraction) + "\n";

  if (with_sensitivity) {
    csv += "\nparameter,delta_th_GHz,xi_th_nm\n";
    auto entry = [&](const std::string& label, double c3_scale,
                     double power_scale) {
      ExperimentConfig c = config;
      c.c3_scale = config.c3_scale * c3_scale;
      c.power = config.power * power_scale;
      const ThresholdsReport r = thresholds(c);
      csv += label + "," + fmt_g(r.delta_th / two_pi / 1e9) + "," +
             fmt_g(r.xi_th * 1e9) + "\n";
    };
    entry("baseline", 1.0, 1.0);
    entry("c3_x0.5", 0.5, 1.0);
    entry("c3_x2", 2.0, 1.0);
    entry("c3_x10", 10.0, 1.0);
    // Strongest pi-line Clebsch-Gordan weighting of the potential (u0 is
    // linear in power, so a power scale emulates it).
    entry("cg2_3_5", 1.0, 3.0 / 5.0);
    entry("cg2_7_15", 1.0, 7.0 / 15.0);
    entry("intensity_halved", 1.0, 0.5);
  }
  return csv;
}

PipelineResult run_pipeline(const ExperimentConfig& config,
                            const std::vector<double>& snapshot_times,
                            bool dump_snapshots) {
  config.validate();
  if (snapshot_times.size() < 4) {
    throw ConfigError("pipeline: need at least 4 snapshot times spanning the bounce");
  }
  for (size_t i = 1; i < snapshot_times.size(); ++i) {
    if (snapshot_times[i] <= snapshot_times[i - 1]) {
      throw ConfigError("pipeline: snapshot times must be strictly increasing");
    }
  }
  const Point p = make_point(config);

  PipelineResult result;
  result.times = snapshot_times;

  // Ground truth budget; a non-bouncing configuration yields the no-signal
  // path rather than an error.
  bool feasible = true;
  try {
    result.truth = photon_budget::corrected_prediction(
        p.species, p.field, p.pot_budget, p.p_incident,
        photon_budget::rb87_d2_pi_lines(), toggles_of(config));
  } catch (const NoBounceError&) {
    feasible = false;
  }

  bounce_dynamics::CloudConfig cc;
  cc.species = p.species;
  cc.geometry = p.geometry;
  cc.detuning = p.delta;
  cc.fall_height = config.fall_height;
  cc.temperature = config.temperature;
  cc.mot_sigma = config.mot_sigma;
  cc.atom_count = config.atom_count;
  cc.seed = config.seed;
  cc.systematics = config.systematics;
  cc.include_vdw = config.correction_vdw;
  cc.c3_scale = config.c3_scale;
  cc.stochastic_recoils = config.stochastic_recoils;
  cc.soft_mirror_edge = config.soft_mirror_edge;
  cc.step_tol = config.bounce_step_tolerance;
  cc.threads = config.threads;
  cc.max_time = snapshot_times.back() + 0.05;
  if (feasible) {
    double scale = 1.0;
    if (config.correction_obe) scale *= 1.0 - result.truth.obe_deficit;
    if (config.correction_hyperfine) scale *= result.truth.hyperfine_factor;
    cc.recoil_scale = scale;
  }
  cc.roughness_offset = config.roughness_offset_recoils;
  if (!config.scattering_enabled) {
    cc.recoil_scale = 0.0;
    cc.roughness_offset = 0.0;
  }

  const auto cloud = bounce_dynamics::simulate_cloud(cc);
  result.bounce_fraction = cloud.bounce_fraction;

  // Render and centroid each snapshot.
  std::vector<virtual_diagnostics::TimedPosition> track;
  for (size_t fi = 0; fi < snapshot_times.size(); ++fi) {
    const double t = snapshot_times[fi];
    std::vector<bounce_dynamics::AtomState> atoms;
    atoms.reserve(cloud.atoms.size());
    long in_view = 0;
    for (const auto& outcome : cloud.atoms) {
      bounce_dynamics::AtomState s;
      if (!bounce_dynamics::evaluate_atom(outcome, t, s)) continue;
      atoms.push_back(s);
      if (std::abs(s.x) <= 0.5 * config.ccd.field_of_view() &&
          s.z >= config.ccd.z_min() &&
          s.z <= config.ccd.z_min() + config.ccd.field_of_view()) {
        ++in_view;
      }
    }
    const auto img = virtual_diagnostics::render_frame(
        atoms, config.ccd, config.ccd.photon_yield, config.seed,
        static_cast<uint32_t>(fi));
    result.artifacts.emplace_back(virtual_diagnostics::frame_filename(t),
                                  virtual_diagnostics::encode_pgm16(img));

    FrameRecord rec;
    rec.time = t;
    rec.atoms_in_view = in_view;
    try {
      rec.centroid = virtual_diagnostics::centroid(
          img, config.ccd, virtual_diagnostics::Region::full(img));
      rec.has_signal = true;
      track.push_back({t, rec.centroid.x, rec.centroid.err});
    } catch (const NumericError&) {
      rec.has_signal = false;
    }
    result.frames.push_back(rec);
  }

  const double t_bounce = bounce_dynamics::fall_time(config.fall_height);
  const double v_incident = std::sqrt(2.0 * g_earth * config.fall_height);

  int pre = 0, post = 0;
  for (const auto& pt : track) (pt.t < t_bounce ? pre : post)++;
  if (!feasible || pre < 2 || post < 2) {
    result.no_signal = true;
  } else {
    result.fit_raw = virtual_diagnostics::fit_trajectory(track, t_bounce,
                                                         p.field.kx, p.species);
    result.fit = virtual_diagnostics::systematics_correction(
        result.fit_raw, config.systematics, v_incident, p.field.kx, p.species);
  }

  // Per-frame rows plus the summary block.
  std::string csv = "t_ms,x_mm,z_mm,x_err_mm\n";
  for (const auto& rec : result.frames) {
    if (!rec.has_signal) continue;
    csv += fmt_g(rec.time * 1e3) + "," + fmt_g(rec.centroid.x * 1e3) + "," +
           fmt_g(rec.centroid.z * 1e3) + "," + fmt_g(rec.centroid.err * 1e3) + "\n";
  }
  csv += "\nvx_pre_mps,vx_post_mps,delta_vx_mps,recoils,recoils_err,"
         "truth_n_corrected,bounce_fraction,no_signal\n";
  if (result.no_signal) {
    csv += "nan,nan,nan,nan,nan," +
           (feasible ? fmt_g(result.truth.n_corrected) : std::string("nan")) +
           "," + fmt_g(result.bounce_fraction) + ",1\n";
  } else {
    csv += fmt_g(result.fit.pre_bounce.velocity) + "," +
           fmt_g(result.fit.post_bounce.velocity) + "," +
           fmt_g(result.fit.delta_vx) + "," + fmt_g(result.fit.recoils) + "," +
           fmt_g(result.fit.recoils_err) + "," +
           fmt_g(result.truth.n_corrected) + "," +
           fmt_g(result.bounce_fraction) + ",0\n";
  }
  result.fits_csv = csv;

  if (dump_snapshots) {
    result.artifacts.emplace_back(
        "snapshots.csv", bounce_dynamics::snapshots_csv(cloud, snapshot_times));
  }
  return result;
}

void write_pipeline_outputs(const PipelineResult& result,
                            const std::string& out_dir) {
  for (const auto& [name, bytes] : result.artifacts) {
    atomic_write_file(out_dir + "/" + name, bytes);
  }
  atomic_write_file(out_dir + "/fits.csv", result.fits_csv);
}

}  // namespace ewsim::pipeline
