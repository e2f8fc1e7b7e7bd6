#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rdsim::csv {

std::vector<std::string> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

// Shortest round-trippable decimal form; empty string for nullopt.
std::string number(double x);
std::string number(const std::optional<double>& x);

// Reads a whole CSV file. The first row is returned as the header; blank
// lines are skipped. Throws FormatError if the file cannot be opened or a
// row has the wrong number of fields.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};
Table read(const std::string& path);

std::ofstream open_for_write(const std::string& path);

long long parse_int(std::string_view field, std::string_view what);
double parse_double(std::string_view field, std::string_view what);

}  // namespace rdsim::csv
