#pragma once

#include <string>
#include <utility>
#include <vector>

#include "core/config.hpp"
#include "core/photon_budget.hpp"
#include "core/virtual_diagnostics.hpp"

namespace ewsim::pipeline {

/// One evaluated (delta, theta) grid point.
struct BudgetRow {
  double delta_over_gamma = 0;
  double xi_um = 0;
  bool bounces = false;
  photon_budget::ScatterBudget budget;
};

/// Budget at the configured operating point. Throws NoBounceError (with the
/// detuning-threshold hint) when the beam-center barrier is below Mgh.
BudgetRow predict(const ExperimentConfig& config);

std::string budget_csv_header();
std::string budget_csv_row(const BudgetRow& row);

/// Grid sweep along "detuning" (values in the config's detuning unit) or
/// "angle" (mrad above the critical angle). Rows past the bounce threshold
/// are emitted with nan budget entries and the run continues.
std::string sweep_csv(const ExperimentConfig& config, const std::string& axis,
                      double from, double to, int points);

struct ThresholdsReport {
  double delta_th = 0;  // rad/s
  double xi_th = 0;     // m
  double angle_th = 0;  // rad
  double r_eff = 0;     // m
  double fraction = 0;
};

ThresholdsReport thresholds(const ExperimentConfig& config);

/// CSV row (delta_th_GHz, xi_th_nm, r_eff_m, fraction); with_sensitivity
/// appends a second table scanning C3 scale, a 3/5 Clebsch-Gordan-weighted
/// potential and a halved-intensity convention.
std::string thresholds_csv(const ExperimentConfig& config, bool with_sensitivity);

struct FrameRecord {
  double time = 0;
  virtual_diagnostics::Centroid centroid;
  bool has_signal = false;
  long atoms_in_view = 0;
};

struct PipelineResult {
  std::vector<double> times;
  std::vector<FrameRecord> frames;
  virtual_diagnostics::TrajectoryFit fit_raw;
  virtual_diagnostics::TrajectoryFit fit;
  photon_budget::ScatterBudget truth;
  double bounce_fraction = 0;
  bool no_signal = false;
  std::string fits_csv;
  // PGM frame files (name -> bytes) plus optional snapshots.csv.
  std::vector<std::pair<std::string, std::string>> artifacts;
};

/// Full measurement pipeline: Monte Carlo cloud -> synthetic frames ->
/// centroids -> piecewise-linear fit -> systematics correction.
PipelineResult run_pipeline(const ExperimentConfig& config,
                            const std::vector<double>& snapshot_times,
                            bool dump_snapshots = false);

/// Writes frames, fits.csv (+ snapshots.csv when dumped) into out_dir.
void write_pipeline_outputs(const PipelineResult& result,
                            const std::string& out_dir);

}  // namespace ewsim::pipeline
