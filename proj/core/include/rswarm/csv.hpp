#pragma once

#include <string>
#include <vector>

namespace rswarm {

/// Plot-ready columnar table: one header line, numbers at 12 significant
/// digits so reruns diff cleanly.
struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row);
};

std::string format_number(double v);
std::string to_csv(const Table& t);

/// Writes `to_csv(t)` to `path`; raises IoError on failure.
void write_csv(const std::string& path, const Table& t);
void write_text(const std::string& path, const std::string& text);

}  // namespace rswarm
