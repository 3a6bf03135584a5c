#include "ewsim/ewsim.h"

#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/errors.hpp"
#include "core/io.hpp"
#include "core/pipeline.hpp"
#include "core/reference.hpp"

struct ewsim_config {
  ewsim::ExperimentConfig cfg;
};

namespace {

thread_local std::string t_last_error;

void set_error(const std::string& msg) { t_last_error = msg; }

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

int status_of(const std::exception& e) {
  if (dynamic_cast<const ewsim::NoBounceError*>(&e)) return EWSIM_ERR_NO_BOUNCE;
  if (dynamic_cast<const ewsim::ConfigError*>(&e)) return EWSIM_ERR_CONFIG;
  return EWSIM_ERR_NUMERIC;
}

template <class Fn>
int guarded(Fn&& fn) {
  try {
    t_last_error.clear();
    fn();
    return EWSIM_OK;
  } catch (const std::exception& e) {
    set_error(e.what());
    return status_of(e);
  } catch (...) {
    set_error("unknown error");
    return EWSIM_ERR_NUMERIC;
  }
}

}  // namespace

extern "C" {

unsigned ewsim_abi_version(void) { return 1; }

const char* ewsim_last_error(void) { return t_last_error.c_str(); }

void ewsim_string_free(char* s) { std::free(s); }

ewsim_config* ewsim_config_from_json(const char* json_text) {
  if (json_text == nullptr) {
    set_error("json_text is NULL");
    return nullptr;
  }
  try {
    t_last_error.clear();
    return new ewsim_config{ewsim::config_from_json(json_text)};
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

ewsim_config* ewsim_config_from_file(const char* path) {
  if (path == nullptr) {
    set_error("path is NULL");
    return nullptr;
  }
  try {
    t_last_error.clear();
    return new ewsim_config{ewsim::config_from_file(path)};
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

ewsim_config* ewsim_config_default(void) {
  try {
    t_last_error.clear();
    return new ewsim_config{};
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

void ewsim_config_free(ewsim_config* config) { delete config; }

int ewsim_config_to_json(const ewsim_config* config, char** json_out) {
  if (!config || !json_out) {
    set_error("NULL argument");
    return EWSIM_ERR_CONFIG;
  }
  return guarded([&] { *json_out = dup_string(ewsim::config_to_json(config->cfg)); });
}

int ewsim_config_set_seed(ewsim_config* config, uint64_t seed) {
  if (!config) {
    set_error("NULL config");
    return EWSIM_ERR_CONFIG;
  }
  config->cfg.seed = seed;
  return EWSIM_OK;
}

int ewsim_config_set_threads(ewsim_config* config, int threads) {
  if (!config) {
    set_error("NULL config");
    return EWSIM_ERR_CONFIG;
  }
  config->cfg.threads = threads;
  return EWSIM_OK;
}

int ewsim_config_set_output_dir(ewsim_config* config, const char* dir) {
  if (!config || !dir) {
    set_error("NULL argument");
    return EWSIM_ERR_CONFIG;
  }
  config->cfg.output_dir = dir;
  return EWSIM_OK;
}

int ewsim_config_get_output_dir(const ewsim_config* config, char** dir_out) {
  if (!config || !dir_out) {
    set_error("NULL argument");
    return EWSIM_ERR_CONFIG;
  }
  *dir_out = dup_string(config->cfg.output_dir);
  return EWSIM_OK;
}

int ewsim_predict_csv(const ewsim_config* config, char** csv_out) {
  if (!config || !csv_out) {
    set_error("NULL argument");
    return EWSIM_ERR_CONFIG;
  }
  return guarded([&] {
    const auto row = ewsim::pipeline::predict(config->cfg);
    *csv_out = dup_string(ewsim::pipeline::budget_csv_header() +
                          ewsim::pipeline::budget_csv_row(row));
  });
}

int ewsim_sweep_csv(const ewsim_config* config, const char* axis, double from,
                    double to, int points, char** csv_out) {
  if (!config || !axis || !csv_out) {
    set_error("NULL argument");
    return EWSIM_ERR_CONFIG;
  }
  return guarded([&] {
    *csv_out = dup_string(
        ewsim::pipeline::sweep_csv(config->cfg, axis, from, to, points));
  });
}

int ewsim_thresholds_csv(const ewsim_config* config, int with_sensitivity,
                         char** csv_out) {
  if (!config || !csv_out) {
    set_error("NULL argument");
    return EWSIM_ERR_CONFIG;
  }
  return guarded([&] {
    *csv_out = dup_string(
        ewsim::pipeline::thresholds_csv(config->cfg, with_sensitivity != 0));
  });
}

int ewsim_pipeline_run(const ewsim_config* config,
                       const double* snapshot_times_s, int n_times,
                       int dump_snapshots, char** summary_csv_out) {
  if (!config) {
    set_error("NULL config");
    return EWSIM_ERR_CONFIG;
  }
  return guarded([&] {
    std::vector<double> times;
    if (snapshot_times_s && n_times > 0) {
      times.assign(snapshot_times_s, snapshot_times_s + n_times);
    } else {
      for (int ms = 5; ms <= 95; ms += 10) times.push_back(ms * 1e-3);
    }
    const auto result = ewsim::pipeline::run_pipeline(config->cfg, times,
                                                      dump_snapshots != 0);
    ewsim::pipeline::write_pipeline_outputs(result, config->cfg.output_dir);
    if (summary_csv_out) *summary_csv_out = dup_string(result.fits_csv);
  });
}

int ewsim_verify_report(const ewsim_config* config, const char* rows_filter,
                        char** report_out, int* all_passed_out) {
  return guarded([&] {
    const ewsim::ExperimentConfig cfg =
        config ? config->cfg : ewsim::ExperimentConfig{};
    const auto rows = ewsim::reference::run_verification(
        cfg, rows_filter ? rows_filter : "");
    if (report_out) *report_out = dup_string(ewsim::reference::report(rows));
    if (all_passed_out) *all_passed_out = ewsim::reference::all_passed(rows) ? 1 : 0;
  });
}

int ewsim_write_file_atomic(const char* path, const char* content,
                            size_t length) {
  if (!path || !content) {
    set_error("NULL argument");
    return EWSIM_ERR_CONFIG;
  }
  return guarded([&] {
    ewsim::atomic_write_file(path, std::string(content, length));
  });
}

}  // extern "C"
