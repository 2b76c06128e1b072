#include "rswarm/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "rswarm/error.hpp"

namespace rswarm {

void Table::add(std::vector<double> row) {
  require(row.size() == header.size(), "table '" + name + "': row width differs from header");
  rows.push_back(std::move(row));
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (i) out += ',';
    out += t.header[i];
  }
  out += '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += format_number(r[i]);
    }
    out += '\n';
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) raise(ErrorCode::IoError, "cannot write '" + path + "'");
  f << text;
  if (!f) raise(ErrorCode::IoError, "write failed for '" + path + "'");
}

void write_csv(const std::string& path, const Table& t) { write_text(path, to_csv(t)); }

}  // namespace rswarm
