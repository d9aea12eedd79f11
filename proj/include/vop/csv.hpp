#pragma once

// Minimal CSV helpers shared by the exporters.

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace vop {

// Shortest representation that parses back to the same double.
std::string format_double(double value);

// Throws std::invalid_argument unless the whole field is a number.
double parse_double(std::string_view text);

std::string csv_escape(std::string_view field);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

// Splits one record, honouring double-quoted fields.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace vop
