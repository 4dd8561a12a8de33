#include "critkill/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "critkill/version.hpp"

namespace critkill {

std::string format_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    double back = std::strtod(buf, nullptr);
    if (back == v || (std::isnan(back) && std::isnan(v))) break;
  }
  return buf;
}

void write_csv(std::ostream& out, const std::string& config_json,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  out << "# version " << kVersion << "\n";
  out << "# config " << config_json << "\n";
  for (size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
}

void write_json_lines(std::ostream& out, const std::string& config_json,
                      const std::vector<std::string>& records) {
  out << "{\"version\":\"" << kVersion << "\",\"config\":" << config_json
      << "}\n";
  for (const auto& rec : records) out << rec << "\n";
}

}  // namespace critkill
