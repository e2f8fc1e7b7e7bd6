#include "rdsim/config.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "rdsim/csv.hpp"
#include "rdsim/errors.hpp"

namespace rdsim {

bool ConfigSection::has(const std::string& key) const { return entries_.count(key) != 0; }

const ConfigSection::Entry& ConfigSection::entry(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    throw ConfigError(fmt::format("[{}]: missing required key '{}'", name_, key));
  }
  used_.insert(key);
  return it->second;
}

void ConfigSection::fail(const std::string& key, const std::string& message) const {
  auto it = entries_.find(key);
  const auto line = it == entries_.end() ? line_ : it->second.line;
  throw ConfigError(fmt::format("line {}: [{}] {}: {}", line, name_, key, message));
}

std::string ConfigSection::get_string(const std::string& key) const { return entry(key).value; }

std::string ConfigSection::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

double ConfigSection::get_double(const std::string& key) const {
  try {
    return csv::parse_double(entry(key).value, key);
  } catch (const FormatError& e) {
    fail(key, e.what());
  }
}

double ConfigSection::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::size_t ConfigSection::get_size(const std::string& key) const {
  long long x = 0;
  try {
    x = csv::parse_int(entry(key).value, key);
  } catch (const FormatError& e) {
    fail(key, e.what());
  }
  if (x < 0) fail(key, "must be nonnegative");
  return static_cast<std::size_t>(x);
}

std::size_t ConfigSection::get_size(const std::string& key, std::size_t fallback) const {
  return has(key) ? get_size(key) : fallback;
}

bool ConfigSection::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto& v = entry(key).value;
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  fail(key, fmt::format("'{}' is not a boolean", v));
}

std::vector<double> ConfigSection::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : csv::split(entry(key).value)) {
    try {
      out.push_back(csv::parse_double(item, key));
    } catch (const FormatError& e) {
      fail(key, e.what());
    }
  }
  return out;
}

std::vector<std::size_t> ConfigSection::get_sizes(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& item : csv::split(entry(key).value)) {
    long long x = 0;
    try {
      x = csv::parse_int(item, key);
    } catch (const FormatError& e) {
      fail(key, e.what());
    }
    if (x < 0) fail(key, "values must be nonnegative");
    out.push_back(static_cast<std::size_t>(x));
  }
  return out;
}

std::vector<std::string> ConfigSection::keys() const { return order_; }

void ConfigSection::set(const std::string& key, std::string value, std::size_t line) {
  if (entries_.count(key)) {
    throw ConfigError(fmt::format("line {}: [{}] duplicate key '{}'", line, name_, key));
  }
  entries_.emplace(key, Entry{std::move(value), line});
  order_.push_back(key);
}

void ConfigSection::check_all_used() const {
  for (const auto& key : order_) {
    if (!used_.count(key)) {
      throw ConfigError(fmt::format("line {}: unknown key '{}' in section [{}]", entries_.at(key).line, key, name_));
    }
  }
}

Config Config::parse(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.text_ = text;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  ConfigSection* current = nullptr;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const auto line = csv::trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(fmt::format("{}:{}: malformed section header", origin, lineno));
      std::string name(csv::trim(line.substr(1, line.size() - 2)));
      if (name.empty()) throw ConfigError(fmt::format("{}:{}: empty section name", origin, lineno));
      if (cfg.sections_.count(name)) {
        throw ConfigError(fmt::format("{}:{}: duplicate section [{}]", origin, lineno, name));
      }
      current = &cfg.sections_.emplace(name, ConfigSection(name, lineno)).first->second;
      cfg.order_.push_back(name);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("{}:{}: expected 'key = value'", origin, lineno));
    }
    if (!current) throw ConfigError(fmt::format("{}:{}: key outside of any section", origin, lineno));
    const std::string key(csv::trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError(fmt::format("{}:{}: empty key", origin, lineno));
    current->set(key, std::string(csv::trim(line.substr(eq + 1))), lineno);
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

bool Config::has_section(const std::string& name) const { return sections_.count(name) != 0; }

const ConfigSection& Config::section(const std::string& name) const {
  auto it = sections_.find(name);
  if (it == sections_.end()) return empty_;
  used_.insert(name);
  return it->second;
}

const ConfigSection* Config::find(const std::string& name) const {
  auto it = sections_.find(name);
  return it == sections_.end() ? nullptr : &it->second;
}

std::vector<std::string> Config::subsections(const std::string& prefix) const {
  std::vector<std::string> out;
  const auto lead = prefix + ".";
  for (const auto& name : order_) {
    if (name.size() > lead.size() && name.compare(0, lead.size(), lead) == 0) {
      out.push_back(name.substr(lead.size()));
    }
  }
  return out;
}

void Config::check_all_used(const std::vector<std::string>& other) const {
  auto foreign = [&](const std::string& name) {
    for (const auto& o : other) {
      if (name == o || (name.size() > o.size() && name.compare(0, o.size() + 1, o + ".") == 0)) return true;
    }
    return false;
  };
  for (const auto& name : order_) {
    if (!used_.count(name)) {
      if (foreign(name)) continue;
      throw ConfigError(fmt::format("unknown section [{}]", name));
    }
    sections_.at(name).check_all_used();
  }
}

}  // namespace rdsim
