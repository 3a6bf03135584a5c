#pragma once

#include <string>
#include <vector>

#include "core/config.hpp"

namespace ewsim::reference {

/// One verification row: a bundled published value re-measured by the
/// simulator at a stated tolerance.
struct RowResult {
  std::string name;
  std::string reference;  // provenance label of the published value
  bool pass = false;
  std::string detail;     // computed vs expected
  double seconds = 0;
};

/// Runs every row whose name contains `filter` (empty = all) against the
/// given configuration (pass the default-constructed config for the
/// bundled reference settings).
std::vector<RowResult> run_verification(const ExperimentConfig& base,
                                        const std::string& filter = "");

std::string report(const std::vector<RowResult>& rows);
bool all_passed(const std::vector<RowResult>& rows);

}  // namespace ewsim::reference
