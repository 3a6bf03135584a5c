// Exercises the public C API surface through the shared library only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <string>

#include "ewsim/ewsim.h"

namespace {

std::string take(char* s) {
  REQUIRE(s != nullptr);
  std::string out(s);
  ewsim_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("abi and error state") {
  CHECK(ewsim_abi_version() == 1);
  CHECK(std::string(ewsim_last_error()).empty());
}

TEST_CASE("config lifecycle and JSON round trip") {
  ewsim_config* cfg = ewsim_config_default();
  REQUIRE(cfg != nullptr);
  char* json = nullptr;
  REQUIRE(ewsim_config_to_json(cfg, &json) == EWSIM_OK);
  const std::string text = take(json);
  CHECK(text.find("\"detuning\"") != std::string::npos);

  ewsim_config* again = ewsim_config_from_json(text.c_str());
  REQUIRE(again != nullptr);
  char* json2 = nullptr;
  REQUIRE(ewsim_config_to_json(again, &json2) == EWSIM_OK);
  CHECK(take(json2) == text);
  ewsim_config_free(again);
  ewsim_config_free(cfg);
}

TEST_CASE("invalid JSON reports a config error") {
  ewsim_config* cfg = ewsim_config_from_json("{broken");
  CHECK(cfg == nullptr);
  CHECK(std::string(ewsim_last_error()).find("parse") != std::string::npos);

  cfg = ewsim_config_from_json(R"({"detuning": {"value": 0, "unit": "Gamma"}})");
  CHECK(cfg == nullptr);
  CHECK(std::string(ewsim_last_error()).find("detuning") != std::string::npos);
}

TEST_CASE("predict returns the budget CSV") {
  ewsim_config* cfg = ewsim_config_default();
  REQUIRE(cfg != nullptr);
  char* csv = nullptr;
  REQUIRE(ewsim_predict_csv(cfg, &csv) == EWSIM_OK);
  const std::string text = take(csv);
  CHECK(text.rfind("delta_over_Gamma,xi_um,", 0) == 0);
  // One header line + one data row.
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  ewsim_config_free(cfg);
}

TEST_CASE("physics-infeasible points map to the no-bounce status") {
  ewsim_config* cfg = ewsim_config_from_json(
      R"({"detuning": {"value": 4000, "unit": "Gamma"}})");
  REQUIRE(cfg != nullptr);
  char* csv = nullptr;
  CHECK(ewsim_predict_csv(cfg, &csv) == EWSIM_ERR_NO_BOUNCE);
  CHECK(csv == nullptr);
  CHECK(std::string(ewsim_last_error()).find("threshold hint") != std::string::npos);
  ewsim_config_free(cfg);
}

TEST_CASE("sweep single point matches predict") {
  ewsim_config* cfg = ewsim_config_default();
  char* a = nullptr;
  char* b = nullptr;
  REQUIRE(ewsim_predict_csv(cfg, &a) == EWSIM_OK);
  REQUIRE(ewsim_sweep_csv(cfg, "detuning", 44, 44, 1, &b) == EWSIM_OK);
  CHECK(take(a) == take(b));
  CHECK(ewsim_sweep_csv(cfg, "bogus", 1, 2, 2, &b) == EWSIM_ERR_CONFIG);
  ewsim_config_free(cfg);
}

TEST_CASE("thresholds CSV") {
  ewsim_config* cfg = ewsim_config_default();
  char* csv = nullptr;
  REQUIRE(ewsim_thresholds_csv(cfg, 0, &csv) == EWSIM_OK);
  CHECK(take(csv).rfind("delta_th_GHz,xi_th_nm,r_eff_m,fraction\n", 0) == 0);
  ewsim_config_free(cfg);
}

TEST_CASE("pipeline writes frames and fits") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "ewsim_capi_out";
  fs::remove_all(dir);

  ewsim_config* cfg = ewsim_config_from_json(R"({
    "atom_count": 500,
    "ccd": {"pixels": 120},
    "output_dir": "unused"
  })");
  REQUIRE(cfg != nullptr);
  REQUIRE(ewsim_config_set_output_dir(cfg, dir.string().c_str()) == EWSIM_OK);
  REQUIRE(ewsim_config_set_seed(cfg, 77) == EWSIM_OK);
  REQUIRE(ewsim_config_set_threads(cfg, 2) == EWSIM_OK);

  const double times[] = {5e-3, 15e-3, 45e-3, 55e-3};
  char* summary = nullptr;
  REQUIRE(ewsim_pipeline_run(cfg, times, 4, 1, &summary) == EWSIM_OK);
  const std::string text = take(summary);
  CHECK(text.rfind("t_ms,x_mm,z_mm,x_err_mm\n", 0) == 0);
  CHECK(fs::exists(dir / "frame_5p0.pgm"));
  CHECK(fs::exists(dir / "frame_55p0.pgm"));
  CHECK(fs::exists(dir / "fits.csv"));
  CHECK(fs::exists(dir / "snapshots.csv"));
  ewsim_config_free(cfg);
  fs::remove_all(dir);
}

TEST_CASE("verify honors the row filter") {
  char* report = nullptr;
  int ok = 0;
  REQUIRE(ewsim_verify_report(nullptr, "calibration", &report, &ok) == EWSIM_OK);
  const std::string text = take(report);
  CHECK(text.find("PASS calibration") != std::string::npos);
  CHECK(ok == 1);
}

TEST_CASE("atomic write helper") {
  namespace fs = std::filesystem;
  const auto path = fs::temp_directory_path() / "ewsim_capi_atomic.txt";
  const char* data = "payload";
  REQUIRE(ewsim_write_file_atomic(path.string().c_str(), data,
                                  std::strlen(data)) == EWSIM_OK);
  CHECK(fs::exists(path));
  fs::remove(path);
}
