#include "core/config.hpp"

#include <cmath>
#include <json.hpp>

#include "core/constants.hpp"
#include "core/errors.hpp"
#include "core/io.hpp"

namespace ewsim {

using nlohmann::json;

namespace {

double unit_scale(const std::string& unit, const char* kind) {
  const std::string k(kind);
  if (k == "length") {
    if (unit == "m") return 1.0;
    if (unit == "mm") return 1e-3;
    if (unit == "um") return 1e-6;
    if (unit == "nm") return 1e-9;
  } else if (k == "angle") {
    if (unit == "rad") return 1.0;
    if (unit == "mrad") return 1e-3;
  } else if (k == "power") {
    if (unit == "W") return 1.0;
    if (unit == "mW") return 1e-3;
  } else if (k == "time") {
    if (unit == "s") return 1.0;
    if (unit == "ms") return 1e-3;
    if (unit == "us") return 1e-6;
  } else if (k == "temperature") {
    if (unit == "K") return 1.0;
    if (unit == "uK") return 1e-6;
  } else if (k == "velocity") {
    if (unit == "m/s") return 1.0;
    if (unit == "mm/s") return 1e-3;
  }
  throw ConfigError("unsupported " + k + " unit '" + unit + "'");
}

double quantity(const json& j, const char* kind, const char* field) {
  if (!j.is_object() || !j.contains("value") || !j.contains("unit")) {
    throw ConfigError(std::string(field) +
                      ": expected a tagged scalar {\"value\": ..., \"unit\": ...}");
  }
  return j.at("value").get<double>() * unit_scale(j.at("unit").get<std::string>(), kind);
}

json tagged(double value, const char* unit) {
  return json{{"value", value}, {"unit", unit}};
}

}  // namespace

double ExperimentConfig::angle(const AtomSpecies& sp) const {
  (void)sp;
  const double thc = ew_optics::critical_angle(refractive_index);
  if (angle_above_critical.has_value()) return thc + *angle_above_critical;
  if (lens_displacement.has_value()) {
    return thc + ew_optics::telescope_angle(*lens_displacement,
                                            telescope_focal_length,
                                            refractive_index);
  }
  throw ConfigError("geometry: one of angle_above_critical / lens_displacement required");
}

ew_optics::EwGeometry ExperimentConfig::geometry(const AtomSpecies& sp) const {
  ew_optics::EwGeometry g;
  g.refractive_index = refractive_index;
  g.angle = angle(sp);
  g.waist = waist;
  g.power = power;
  g.polarization = polarization;
  return g;
}

void ExperimentConfig::validate() const {
  if (angle_above_critical.has_value() == lens_displacement.has_value()) {
    throw ConfigError("geometry: exactly one of angle_above_critical / "
                      "lens_displacement must be given");
  }
  const AtomSpecies sp = species();
  sp.validate();
  geometry(sp).validate();
  if (detuning_angular(sp) == 0) throw ConfigError("detuning must be nonzero");
  if (fall_height <= 0) throw ConfigError("fall height must be positive");
  if (temperature < 0) throw ConfigError("temperature must be nonnegative");
  if (atom_count <= 0) throw ConfigError("atom count must be positive");
  if (mot_sigma <= 0) throw ConfigError("mot_sigma must be positive");
  if (c3_scale < 0) throw ConfigError("c3_scale must be nonnegative");
  if (bounce_step_tolerance <= 0) throw ConfigError("bounce_step_tolerance must be positive");
  ccd.validate();
}

ExperimentConfig config_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config JSON parse error: ") + e.what());
  }

  ExperimentConfig c;
  try {
    if (j.contains("species")) c.species_name = j.at("species").get<std::string>();

    if (j.contains("geometry")) {
      const json& g = j.at("geometry");
      if (g.contains("refractive_index")) {
        c.refractive_index = g.at("refractive_index").get<double>();
      }
      const bool has_angle = g.contains("angle_above_critical");
      const bool has_lens = g.contains("lens_displacement");
      if (has_angle && has_lens) {
        throw ConfigError("geometry: give only one of angle_above_critical / "
                          "lens_displacement");
      }
      if (has_angle) {
        c.angle_above_critical =
            quantity(g.at("angle_above_critical"), "angle", "angle_above_critical");
        c.lens_displacement.reset();
      } else if (has_lens) {
        c.lens_displacement =
            quantity(g.at("lens_displacement"), "length", "lens_displacement");
        c.angle_above_critical.reset();
      }
      if (g.contains("telescope_focal_length")) {
        c.telescope_focal_length = quantity(g.at("telescope_focal_length"),
                                            "length", "telescope_focal_length");
      }
      if (g.contains("waist")) c.waist = quantity(g.at("waist"), "length", "waist");
      if (g.contains("power")) c.power = quantity(g.at("power"), "power", "power");
      if (g.contains("polarization")) {
        c.polarization =
            ew_optics::parse_polarization(g.at("polarization").get<std::string>());
      }
    }

    if (j.contains("detuning")) {
      const json& d = j.at("detuning");
      if (!d.is_object() || !d.contains("value") || !d.contains("unit")) {
        throw ConfigError("detuning: unit tag is mandatory ({\"value\", \"unit\"})");
      }
      c.detuning.value = d.at("value").get<double>();
      c.detuning.unit = parse_detuning_unit(d.at("unit").get<std::string>());
    }

    if (j.contains("fall_height")) {
      c.fall_height = quantity(j.at("fall_height"), "length", "fall_height");
    }
    if (j.contains("temperature")) {
      c.temperature = quantity(j.at("temperature"), "temperature", "temperature");
    }
    if (j.contains("atom_count")) c.atom_count = j.at("atom_count").get<int>();
    if (j.contains("mot_sigma")) {
      c.mot_sigma = quantity(j.at("mot_sigma"), "length", "mot_sigma");
    }

    if (j.contains("systematics")) {
      const json& s = j.at("systematics");
      auto& sys = c.systematics;
      if (s.contains("prism_tilt")) {
        sys.prism_tilt = quantity(s.at("prism_tilt"), "angle", "prism_tilt");
      }
      if (s.contains("prism_tilt_uncertainty")) {
        sys.prism_tilt_uncertainty =
            quantity(s.at("prism_tilt_uncertainty"), "angle", "prism_tilt_uncertainty");
      }
      if (s.contains("mot_horizontal_offset")) {
        sys.mot_horizontal_offset = quantity(s.at("mot_horizontal_offset"),
                                             "length", "mot_horizontal_offset");
      }
      if (s.contains("launch_velocity")) {
        sys.launch_velocity =
            quantity(s.at("launch_velocity"), "velocity", "launch_velocity");
      }
      if (s.contains("launch_velocity_uncertainty")) {
        sys.launch_velocity_uncertainty =
            quantity(s.at("launch_velocity_uncertainty"), "velocity",
                     "launch_velocity_uncertainty");
      }
    }

    if (j.contains("corrections")) {
      const json& t = j.at("corrections");
      if (t.contains("vdw")) c.correction_vdw = t.at("vdw").get<bool>();
      if (t.contains("hyperfine")) c.correction_hyperfine = t.at("hyperfine").get<bool>();
      if (t.contains("obe")) c.correction_obe = t.at("obe").get<bool>();
      if (t.contains("roughness_offset_recoils")) {
        c.roughness_offset_recoils = t.at("roughness_offset_recoils").get<double>();
      }
    }
    if (j.contains("c3_scale")) c.c3_scale = j.at("c3_scale").get<double>();

    if (j.contains("ccd")) {
      const json& d = j.at("ccd");
      if (d.contains("pixels")) c.ccd.pixels = d.at("pixels").get<int>();
      if (d.contains("pixel_pitch")) {
        c.ccd.pixel_pitch = quantity(d.at("pixel_pitch"), "length", "pixel_pitch");
      }
      if (d.contains("exposure")) {
        c.ccd.exposure = quantity(d.at("exposure"), "time", "exposure");
      }
      if (d.contains("surface_offset")) {
        c.ccd.surface_offset =
            quantity(d.at("surface_offset"), "length", "surface_offset");
      }
      if (d.contains("photon_yield")) c.ccd.photon_yield = d.at("photon_yield").get<double>();
      if (d.contains("shots_per_frame")) {
        c.ccd.shots_per_frame = d.at("shots_per_frame").get<int>();
      }
      if (d.contains("noise")) c.ccd.noise = d.at("noise").get<bool>();
    }

    if (j.contains("simulation")) {
      const json& s = j.at("simulation");
      if (s.contains("stochastic_recoils")) {
        c.stochastic_recoils = s.at("stochastic_recoils").get<bool>();
      }
      if (s.contains("soft_mirror_edge")) {
        c.soft_mirror_edge = s.at("soft_mirror_edge").get<bool>();
      }
      if (s.contains("scattering")) {
        c.scattering_enabled = s.at("scattering").get<bool>();
      }
      if (s.contains("bounce_step_tolerance")) {
        c.bounce_step_tolerance = s.at("bounce_step_tolerance").get<double>();
      }
    }

    if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
    if (j.contains("threads")) c.threads = j.at("threads").get<int>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }

  c.validate();
  return c;
}

ExperimentConfig config_from_file(const std::string& path) {
  return config_from_json(read_file(path));
}

std::string config_to_json(const ExperimentConfig& c) {
  json g{{"refractive_index", c.refractive_index},
         {"telescope_focal_length", tagged(c.telescope_focal_length, "m")},
         {"waist", tagged(c.waist, "m")},
         {"power", tagged(c.power, "W")},
         {"polarization", ew_optics::polarization_name(c.polarization)}};
  if (c.angle_above_critical.has_value()) {
    g["angle_above_critical"] = tagged(*c.angle_above_critical, "rad");
  }
  if (c.lens_displacement.has_value()) {
    g["lens_displacement"] = tagged(*c.lens_displacement, "m");
  }

  json j{
      {"species", c.species_name},
      {"geometry", g},
      {"detuning",
       json{{"value", c.detuning.value},
            {"unit", detuning_unit_name(c.detuning.unit)}}},
      {"fall_height", tagged(c.fall_height, "m")},
      {"temperature", tagged(c.temperature, "K")},
      {"atom_count", c.atom_count},
      {"mot_sigma", tagged(c.mot_sigma, "m")},
      {"systematics",
       json{{"prism_tilt", tagged(c.systematics.prism_tilt, "rad")},
            {"prism_tilt_uncertainty",
             tagged(c.systematics.prism_tilt_uncertainty, "rad")},
            {"mot_horizontal_offset",
             tagged(c.systematics.mot_horizontal_offset, "m")},
            {"launch_velocity", tagged(c.systematics.launch_velocity, "m/s")},
            {"launch_velocity_uncertainty",
             tagged(c.systematics.launch_velocity_uncertainty, "m/s")}}},
      {"corrections",
       json{{"vdw", c.correction_vdw},
            {"hyperfine", c.correction_hyperfine},
            {"obe", c.correction_obe},
            {"roughness_offset_recoils", c.roughness_offset_recoils}}},
      {"c3_scale", c.c3_scale},
      {"ccd",
       json{{"pixels", c.ccd.pixels},
            {"pixel_pitch", tagged(c.ccd.pixel_pitch, "m")},
            {"exposure", tagged(c.ccd.exposure, "s")},
            {"surface_offset", tagged(c.ccd.surface_offset, "m")},
            {"photon_yield", c.ccd.photon_yield},
            {"shots_per_frame", c.ccd.shots_per_frame},
            {"noise", c.ccd.noise}}},
      {"simulation",
       json{{"stochastic_recoils", c.stochastic_recoils},
            {"soft_mirror_edge", c.soft_mirror_edge},
            {"scattering", c.scattering_enabled},
            {"bounce_step_tolerance", c.bounce_step_tolerance}}},
      {"seed", c.seed},
      {"threads", c.threads},
      {"output_dir", c.output_dir}};
  return j.dump(2) + "\n";
}

}  // namespace ewsim
