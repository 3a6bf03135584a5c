#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "core/config.hpp"
#include "core/io.hpp"
#include "core/pipeline.hpp"

using namespace ewsim;

TEST_CASE("default config validates and round-trips") {
  ExperimentConfig cfg;
  cfg.validate();
  const auto parsed = config_from_json(config_to_json(cfg));
  CHECK(parsed == cfg);
  // Twice through: stable.
  CHECK(config_to_json(parsed) == config_to_json(cfg));
}

TEST_CASE("custom config round-trips with every field touched") {
  ExperimentConfig cfg;
  cfg.species_name = "Rb87_D2";
  cfg.angle_above_critical.reset();
  cfg.lens_displacement = 1.02e-4;
  cfg.telescope_focal_length = 75e-3;
  cfg.waist = 3e-4;
  cfg.power = 10.5e-3;
  cfg.polarization = ew_optics::Polarization::TE;
  cfg.detuning = {264.0, DetuningUnit::MegaHertz};
  cfg.fall_height = 5e-3;
  cfg.temperature = 12e-6;
  cfg.atom_count = 777;
  cfg.mot_sigma = 0.4e-3;
  cfg.systematics.prism_tilt = 12e-3;
  cfg.systematics.prism_tilt_uncertainty = 5e-3;
  cfg.systematics.mot_horizontal_offset = -0.8e-3;
  cfg.systematics.launch_velocity = 1.1e-3;
  cfg.systematics.launch_velocity_uncertainty = 2e-3;
  cfg.correction_vdw = false;
  cfg.correction_obe = false;
  cfg.roughness_offset_recoils = 3.0;
  cfg.c3_scale = 2.0;
  cfg.ccd.pixels = 400;
  cfg.ccd.exposure = 0.1e-3;
  cfg.ccd.noise = false;
  cfg.stochastic_recoils = false;
  cfg.scattering_enabled = false;
  cfg.seed = 123456789012345ull;
  cfg.threads = 3;
  cfg.output_dir = "elsewhere";
  const auto parsed = config_from_json(config_to_json(cfg));
  CHECK(parsed == cfg);
}

TEST_CASE("tagged units are parsed and mandatory on detuning") {
  const char* good = R"({
    "geometry": {"angle_above_critical": {"value": 0.9, "unit": "mrad"},
                 "waist": {"value": 335, "unit": "um"},
                 "power": {"value": 19, "unit": "mW"}},
    "detuning": {"value": 44, "unit": "Gamma"},
    "fall_height": {"value": 6.6, "unit": "mm"},
    "temperature": {"value": 10, "unit": "uK"}
  })";
  const auto cfg = config_from_json(good);
  CHECK(cfg.waist == doctest::Approx(335e-6));
  CHECK(cfg.power == doctest::Approx(19e-3));
  CHECK(cfg.fall_height == doctest::Approx(6.6e-3));
  CHECK(cfg.temperature == doctest::Approx(10e-6));
  CHECK(*cfg.angle_above_critical == doctest::Approx(0.9e-3));

  CHECK_THROWS_AS(config_from_json(R"({"detuning": 44})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"detuning": {"value": 44}})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"detuning": {"value": 44, "unit": "GHz"}})"),
                  ConfigError);
  CHECK_THROWS_AS(
      config_from_json(R"({"geometry": {"waist": {"value": 1, "unit": "furlong"}}})"),
      ConfigError);
}

TEST_CASE("exactly one of angle / lens displacement") {
  CHECK_THROWS_AS(config_from_json(R"({
    "geometry": {"angle_above_critical": {"value": 0.9, "unit": "mrad"},
                 "lens_displacement": {"value": 0.102, "unit": "mm"}}
  })"),
                  ConfigError);

  // Lens displacement maps through the telescope relation.
  const auto cfg = config_from_json(R"({
    "geometry": {"lens_displacement": {"value": 0.102, "unit": "mm"},
                 "telescope_focal_length": {"value": 75, "unit": "mm"}}
  })");
  const auto sp = cfg.species();
  const double above = cfg.angle(sp) - ew_optics::critical_angle(1.51);
  CHECK(above == doctest::Approx(0.102e-3 / (75e-3 * 1.51)).epsilon(1e-12));
}

TEST_CASE("validation rejects nonsense") {
  CHECK_THROWS_AS(config_from_json(R"({"atom_count": -5})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"detuning": {"value": 0, "unit": "Gamma"}})"),
                  ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"species": "Cs133"})"), ConfigError);
  CHECK_THROWS_AS(config_from_json("not json at all"), ConfigError);
  CHECK_THROWS_AS(
      config_from_json(R"({"geometry": {"angle_above_critical": {"value": -1, "unit": "mrad"}}})"),
      ConfigError);
}

TEST_CASE("detuning unit tags give identical physics") {
  ExperimentConfig a;
  a.detuning = {44.0, DetuningUnit::Gamma};
  ExperimentConfig b;
  b.detuning = {264.0, DetuningUnit::MegaHertz};  // 44 x 6.0 MHz
  const auto ra = pipeline::predict(a);
  const auto rb = pipeline::predict(b);
  CHECK(ra.budget.n_twolevel == doctest::Approx(rb.budget.n_twolevel).epsilon(1e-12));
  CHECK(ra.budget.n_corrected == doctest::Approx(rb.budget.n_corrected).epsilon(1e-12));
}

TEST_CASE("sweep: single point equals predict; infeasible rows are flagged") {
  ExperimentConfig cfg;
  const auto row = pipeline::predict(cfg);
  const auto one = pipeline::sweep_csv(cfg, "detuning", 44, 44, 1);
  CHECK(one == pipeline::budget_csv_header() + pipeline::budget_csv_row(row));

  // Scan past the bounce threshold: nan rows, run continues.
  const auto wide = pipeline::sweep_csv(cfg, "detuning", 100, 4000, 4);
  int lines = 0, nans = 0;
  for (size_t pos = 0; pos < wide.size(); ++pos) {
    if (wide[pos] == '\n') ++lines;
  }
  for (size_t pos = 0; (pos = wide.find("nan", pos)) != std::string::npos; pos += 3) {
    ++nans;
  }
  CHECK(lines == 5);  // header + 4 rows
  CHECK(nans >= 5);   // at least one fully flagged row
  CHECK_THROWS_AS(pipeline::sweep_csv(cfg, "wavelength", 1, 2, 2), ConfigError);
}

TEST_CASE("sweep along the angle axis covers the published decay lengths") {
  ExperimentConfig cfg;
  const auto csv = pipeline::sweep_csv(cfg, "angle", 0.9, 24.0, 3);
  // Second column of the first data row is xi_um ~ 2.75.
  const auto line = csv.substr(csv.find('\n') + 1);
  const auto a = line.find(',');
  const auto b = line.find(',', a + 1);
  const double xi_um = std::stod(line.substr(a + 1, b - a - 1));
  CHECK(xi_um == doctest::Approx(2.75).epsilon(0.01));
}

TEST_CASE("atomic writes and byte-identical reruns") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "ewsim_io_test";
  fs::remove_all(dir);
  const auto path = (dir / "a" / "b.txt").string();
  atomic_write_file(path, "hello\n");
  CHECK(read_file(path) == "hello\n");
  atomic_write_file(path, "rewritten\n");
  CHECK(read_file(path) == "rewritten\n");
  CHECK_FALSE(fs::exists(path + ".tmp"));

  ExperimentConfig cfg;
  cfg.atom_count = 400;
  cfg.ccd.pixels = 100;
  std::vector<double> times{5e-3, 15e-3, 45e-3, 55e-3};
  const auto r1 = pipeline::run_pipeline(cfg, times);
  const auto r2 = pipeline::run_pipeline(cfg, times);
  CHECK(r1.fits_csv == r2.fits_csv);
  REQUIRE(r1.artifacts.size() == r2.artifacts.size());
  for (size_t i = 0; i < r1.artifacts.size(); ++i) {
    CHECK(r1.artifacts[i].first == r2.artifacts[i].first);
    CHECK(r1.artifacts[i].second == r2.artifacts[i].second);
  }
  fs::remove_all(dir);
}

TEST_CASE("threshold CSV layout") {
  ExperimentConfig cfg;
  const auto csv = pipeline::thresholds_csv(cfg, false);
  CHECK(csv.rfind("delta_th_GHz,xi_th_nm,r_eff_m,fraction\n", 0) == 0);
  const auto with = pipeline::thresholds_csv(cfg, true);
  CHECK(with.find("parameter,delta_th_GHz,xi_th_nm") != std::string::npos);
  CHECK(with.find("cg2_3_5") != std::string::npos);
}

TEST_CASE("pipeline flags no-signal instead of failing") {
  ExperimentConfig cfg;
  cfg.detuning = {4000.0, DetuningUnit::Gamma};  // far past threshold
  cfg.atom_count = 200;
  const auto res =
      pipeline::run_pipeline(cfg, {5e-3, 15e-3, 45e-3, 55e-3});
  CHECK(res.no_signal);
  CHECK(res.bounce_fraction == 0.0);
  CHECK(res.fits_csv.find(",1\n") != std::string::npos);  // no_signal column
}
