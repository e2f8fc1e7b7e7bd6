#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "rdsim/csv.hpp"
#include "rdsim/errors.hpp"
#include "rdsim/graph.hpp"

namespace rdsim {
namespace csv {

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string number(double x) { return fmt::format("{}", x); }

std::string number(const std::optional<double>& x) { return x ? number(*x) : std::string{}; }

Table read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(fmt::format("cannot open '{}'", path));
  Table t;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw FormatError(fmt::format("{}:{}: expected {} fields, found {}", path, lineno,
                                    t.header.size(), fields.size()));
    }
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(lineno);
  }
  if (!have_header) throw FormatError(fmt::format("'{}' is empty", path));
  return t;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(fmt::format("cannot write '{}'", path));
  return out;
}

long long parse_int(std::string_view field, std::string_view what) {
  long long value = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw FormatError(fmt::format("{}: '{}' is not an integer", what, field));
  }
  return value;
}

double parse_double(std::string_view field, std::string_view what) {
  double value = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw FormatError(fmt::format("{}: '{}' is not a number", what, field));
  }
  return value;
}

}  // namespace csv

void write_edge_list(const std::string& path, const Graph& g) {
  auto out = csv::open_for_write(path);
  out << "src,dst\n";
  for (const auto& [u, v] : g.edges()) out << u << ',' << v << '\n';
}

Graph read_edge_list(const std::string& path, std::size_t node_count) {
  const auto table = csv::read(path);
  if (table.header != std::vector<std::string>{"src", "dst"}) {
    throw FormatError(fmt::format("{}: header must be 'src,dst'", path));
  }
  std::vector<Edge> edges;
  edges.reserve(table.rows.size());
  std::size_t max_node = 0;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto where = fmt::format("{}:{}", path, table.line_numbers[i]);
    const auto u = csv::parse_int(table.rows[i][0], where);
    const auto v = csv::parse_int(table.rows[i][1], where);
    if (u < 0 || v < 0) throw FormatError(where + ": negative node index");
    if (u >= v) throw FormatError(where + ": edges must be written with src < dst");
    edges.emplace_back(static_cast<node_t>(u), static_cast<node_t>(v));
    max_node = std::max<std::size_t>(max_node, static_cast<std::size_t>(v) + 1);
  }
  if (node_count == 0) node_count = max_node;
  try {
    return Graph(node_count, std::move(edges));
  } catch (const std::invalid_argument& e) {
    throw FormatError(fmt::format("{}: {}", path, e.what()));
  }
}

void write_attributes(const std::string& path, std::span<const AttributeVector> attrs) {
  auto out = csv::open_for_write(path);
  const std::size_t n = attrs.empty() ? 0 : attrs.front().size();
  out << "node";
  for (const auto& a : attrs) {
    if (a.size() != n) throw std::invalid_argument("attribute vectors differ in length");
    out << ',' << a.name();
  }
  out << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    out << i;
    for (const auto& a : attrs) out << ',' << static_cast<int>(a[i]);
    out << '\n';
  }
}

std::vector<AttributeVector> read_attributes(const std::string& path) {
  const auto table = csv::read(path);
  if (table.header.empty() || table.header[0] != "node") {
    throw FormatError(fmt::format("{}: header must start with 'node'", path));
  }
  const std::size_t cols = table.header.size() - 1;
  std::vector<std::vector<std::uint8_t>> values(cols, std::vector<std::uint8_t>(table.rows.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto where = fmt::format("{}:{}", path, table.line_numbers[i]);
    if (csv::parse_int(table.rows[i][0], where) != static_cast<long long>(i)) {
      throw FormatError(where + ": node indices must be 0, 1, 2, ... in order");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      const auto x = csv::parse_int(table.rows[i][c + 1], where);
      if (x != 0 && x != 1) throw FormatError(where + ": attribute values must be 0 or 1");
      values[c][i] = static_cast<std::uint8_t>(x);
    }
  }
  std::vector<AttributeVector> out;
  for (std::size_t c = 0; c < cols; ++c) {
    out.emplace_back(table.header[c + 1], std::move(values[c]));
  }
  return out;
}

}  // namespace rdsim
