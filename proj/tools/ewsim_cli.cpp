// ewsim command-line front end. Talks to the simulation core exclusively
// through the public C API (include/ewsim/ewsim.h).

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ewsim/ewsim.h"

namespace {

struct ConfigDeleter {
  void operator()(ewsim_config* c) const { ewsim_config_free(c); }
};
using ConfigPtr = std::unique_ptr<ewsim_config, ConfigDeleter>;

struct StringDeleter {
  void operator()(char* s) const { ewsim_string_free(s); }
};
using CStr = std::unique_ptr<char, StringDeleter>;

int fail(int status) {
  std::fprintf(stderr, "error: %s\n", ewsim_last_error());
  return status;
}

ConfigPtr load_config(const std::string& path, uint64_t seed, bool seed_set,
                      int threads, bool threads_set, const std::string& out_dir,
                      int* status) {
  ConfigPtr cfg(path.empty() ? ewsim_config_default()
                             : ewsim_config_from_file(path.c_str()));
  if (!cfg) {
    *status = EWSIM_ERR_CONFIG;
    return nullptr;
  }
  if (seed_set) ewsim_config_set_seed(cfg.get(), seed);
  if (threads_set) ewsim_config_set_threads(cfg.get(), threads);
  if (!out_dir.empty()) ewsim_config_set_output_dir(cfg.get(), out_dir.c_str());
  *status = EWSIM_OK;
  return cfg;
}

int write_or_print(const ConfigPtr& cfg, const char* filename,
                   const std::string& text, bool to_file) {
  std::fputs(text.c_str(), stdout);
  if (!to_file) return EWSIM_OK;
  CStr dir;
  {
    char* raw = nullptr;
    ewsim_config_get_output_dir(cfg.get(), &raw);
    dir.reset(raw);
  }
  const std::string path = std::string(dir.get()) + "/" + filename;
  const int rc = ewsim_write_file_atomic(path.c_str(), text.c_str(), text.size());
  if (rc != EWSIM_OK) return fail(rc);
  std::fprintf(stderr, "wrote %s\n", path.c_str());
  return EWSIM_OK;
}

std::vector<double> parse_times_ms(const std::string& spec) {
  std::vector<double> out;
  std::string token;
  for (size_t i = 0; i <= spec.size(); ++i) {
    if (i == spec.size() || spec[i] == ',') {
      if (!token.empty()) out.push_back(std::stod(token) * 1e-3);
      token.clear();
    } else {
      token += spec[i];
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ewsim — evanescent-wave atom mirror simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, axis = "detuning", rows, times_spec;
  uint64_t seed = 0;
  int threads = 0;
  double from = 0, to = 0;
  int points = 1;
  bool sensitivity = false, dump_snapshots = false, write_files = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config JSON");
    cmd->add_option("--out", out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", seed, "random seed (overrides config)");
    cmd->add_option("--threads", threads, "worker thread bound (0 = auto)");
  };

  CLI::App* predict = app.add_subcommand(
      "predict", "scattered-photon budget for one operating point");
  add_common(predict);
  predict->add_flag("--write", write_files, "also write predict.csv to --out");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "budget grid along a detuning or angle axis");
  add_common(sweep);
  sweep->add_option("--axis", axis, "detuning | angle")->required();
  sweep->add_option("--from", from,
                    "start (detuning unit of the config, or mrad above "
                    "critical for angle)")->required();
  sweep->add_option("--to", to, "end of the scan")->required();
  sweep->add_option("--points", points, "grid size")->required();
  sweep->add_flag("--write", write_files, "also write sweep.csv to --out");

  CLI::App* pipelinecmd = app.add_subcommand(
      "pipeline", "cloud simulation + synthetic frames + trajectory fit");
  add_common(pipelinecmd);
  pipelinecmd->add_option(
      "--times", times_spec,
      "snapshot times in ms, comma separated (default 5,15,...,95)");
  pipelinecmd->add_flag("--dump-snapshots", dump_snapshots,
                        "also write per-atom snapshots.csv");

  CLI::App* thresholds = app.add_subcommand(
      "thresholds", "detuning/decay-length bounce thresholds and mirror size");
  add_common(thresholds);
  thresholds->add_flag("--sensitivity", sensitivity,
                       "append a parameter-sensitivity table");
  thresholds->add_flag("--write", write_files,
                       "also write thresholds.csv to --out");

  CLI::App* verify = app.add_subcommand(
      "verify", "re-measure the bundled published reference values");
  add_common(verify);
  verify->add_option("--rows", rows, "row-name filter (substring)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : EWSIM_ERR_CONFIG;  // usage errors exit with 1
  }

  auto option_given = [&](const char* name) {
    for (const CLI::App* cmd :
         {predict, sweep, pipelinecmd, thresholds, verify}) {
      if (cmd->count(name) > 0) return true;
    }
    return false;
  };
  int status = EWSIM_OK;
  const bool seed_set = option_given("--seed");
  const bool threads_set = option_given("--threads");
  ConfigPtr cfg = load_config(config_path, seed, seed_set, threads, threads_set,
                              out_dir, &status);
  if (!cfg) return fail(status);

  if (predict->parsed()) {
    char* raw = nullptr;
    const int rc = ewsim_predict_csv(cfg.get(), &raw);
    if (rc != EWSIM_OK) return fail(rc);
    CStr csv(raw);
    return write_or_print(cfg, "predict.csv", csv.get(), write_files);
  }

  if (sweep->parsed()) {
    char* raw = nullptr;
    const int rc = ewsim_sweep_csv(cfg.get(), axis.c_str(), from, to, points, &raw);
    if (rc != EWSIM_OK) return fail(rc);
    CStr csv(raw);
    return write_or_print(cfg, "sweep.csv", csv.get(), write_files);
  }

  if (thresholds->parsed()) {
    char* raw = nullptr;
    const int rc = ewsim_thresholds_csv(cfg.get(), sensitivity ? 1 : 0, &raw);
    if (rc != EWSIM_OK) return fail(rc);
    CStr csv(raw);
    return write_or_print(cfg, "thresholds.csv", csv.get(), write_files);
  }

  if (pipelinecmd->parsed()) {
    std::vector<double> times;
    if (!times_spec.empty()) times = parse_times_ms(times_spec);
    char* raw = nullptr;
    const int rc = ewsim_pipeline_run(cfg.get(), times.empty() ? nullptr : times.data(),
                                      static_cast<int>(times.size()),
                                      dump_snapshots ? 1 : 0, &raw);
    if (rc != EWSIM_OK) return fail(rc);
    CStr csv(raw);
    std::fputs(csv.get(), stdout);
    return EWSIM_OK;
  }

  if (verify->parsed()) {
    char* raw = nullptr;
    int all_passed = 0;
    const int rc = ewsim_verify_report(cfg.get(), rows.empty() ? nullptr : rows.c_str(),
                                       &raw, &all_passed);
    if (rc != EWSIM_OK) return fail(rc);
    CStr rep(raw);
    std::fputs(rep.get(), stdout);
    return all_passed ? 0 : 1;
  }

  return EWSIM_ERR_CONFIG;
}
