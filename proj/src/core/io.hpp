#pragma once

#include <string>

namespace ewsim {

/// Writes content to path atomically (temp file in the same directory,
/// then rename). Creates parent directories as needed.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

/// Locale-independent %.10g formatting for CSV cells.
std::string fmt_g(double v);

}  // namespace ewsim
