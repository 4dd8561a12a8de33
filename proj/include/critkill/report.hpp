#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace critkill {

// shortest representation that round-trips a double exactly
std::string format_double(double v);

// CSV with '#'-prefixed metadata lines (version, resolved config), then a
// header row and data rows. UTF-8, '.' decimal separator.
void write_csv(std::ostream& out, const std::string& config_json,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// JSON lines: first a meta record {"version", "config"}, then one record per
// line. Records arrive pre-serialized.
void write_json_lines(std::ostream& out, const std::string& config_json,
                      const std::vector<std::string>& records);

}  // namespace critkill
