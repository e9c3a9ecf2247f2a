#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "typesize/rate_analysis.hpp"

namespace typesize::cli {

/// Writes to a sibling temporary file and renames it over `path`, so a
/// failed run never leaves partial output. Throws IoError.
void write_atomic(const std::filesystem::path& path, const std::string& bytes);

std::string read_file(const std::filesystem::path& path);

/// Shortest text that round-trips the double.
std::string fmt(double v);

/// "typesize-report 1" followed by key=value lines; rows are
/// space-separated key=value records prefixed by "row".
class Report {
 public:
  explicit Report(const std::string& command);

  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value) { add(key, fmt(value)); }
  void row(const std::vector<std::pair<std::string, std::string>>& fields);
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

/// Line chart of y(n) against log2 n with the fitted line and the slope.
std::string fit_svg(const ThirdOrderFit& fit, const std::string& title);

}  // namespace typesize::cli
