#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/bounce_dynamics.hpp"
#include "core/ew_optics.hpp"
#include "core/species.hpp"
#include "core/units.hpp"
#include "core/virtual_diagnostics.hpp"

namespace ewsim {

/// Whole-experiment description, parsed from a single JSON document with
/// unit-tagged scalars ({"value": 44, "unit": "Gamma"}). Exactly one of
/// angle_above_critical / lens_displacement selects the angle of incidence.
struct ExperimentConfig {
  std::string species_name = "Rb87_D2";

  double refractive_index = 1.51;
  std::optional<double> angle_above_critical = 0.9e-3;  // rad
  std::optional<double> lens_displacement;              // m
  double telescope_focal_length = 75e-3;
  double waist = 335e-6;
  double power = 19e-3;
  ew_optics::Polarization polarization = ew_optics::Polarization::TM;

  Detuning detuning{44.0, DetuningUnit::Gamma};
  double fall_height = 6.6e-3;
  double temperature = 10e-6;
  int atom_count = 100000;
  double mot_sigma = 0.3e-3;

  bounce_dynamics::Systematics systematics;

  bool correction_vdw = true;
  bool correction_hyperfine = true;
  bool correction_obe = true;
  double roughness_offset_recoils = 0.0;
  double c3_scale = 1.0;

  virtual_diagnostics::CcdSpec ccd;

  bool stochastic_recoils = true;
  bool soft_mirror_edge = true;
  bool scattering_enabled = true;  // false = elastic mirror (diagnostics)
  double bounce_step_tolerance = 1e-6;

  uint64_t seed = 20260810;
  int threads = 0;
  std::string output_dir = "out";

  AtomSpecies species() const { return species_preset(species_name); }
  double angle(const AtomSpecies& sp) const;
  ew_optics::EwGeometry geometry(const AtomSpecies& sp) const;
  double detuning_angular(const AtomSpecies& sp) const {
    return detuning.to_angular(sp);
  }
  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig config_from_json(const std::string& json_text);
ExperimentConfig config_from_file(const std::string& path);
std::string config_to_json(const ExperimentConfig& config);

}  // namespace ewsim
