#pragma once

#include <string>
#include <vector>

namespace pipescore::csv {

// Shortest decimal form that round-trips the exact double (std::to_chars).
std::string format_double(double v);

// Fixed-precision form for report columns meant for humans.
std::string format_fixed(double v, int digits);

std::string escape(const std::string& field);

// Minimal RFC-4180 reader: quoted fields, embedded commas and quotes.
// Returns one vector of fields per non-empty line.
std::vector<std::vector<std::string>> read_rows(const std::string& path);

std::vector<std::string> split_line(const std::string& line);

}  // namespace pipescore::csv
