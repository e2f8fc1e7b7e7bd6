#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rdsim {

// Line-oriented sectioned key/value configuration:
//
//   # comment
//   [section]
//   key = value
//   list_key = 1, 2, 3
//
// Every key and section must be read by the consumer; check_all_used()
// reports leftovers so that typos are hard errors rather than silently
// ignored settings.
class ConfigSection {
 public:
  ConfigSection() = default;
  ConfigSection(std::string name, std::size_t line) : name_(std::move(name)), line_(line) {}

  const std::string& name() const noexcept { return name_; }
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::size_t get_size(const std::string& key) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::size_t> get_sizes(const std::string& key) const;

  // Keys in file order.
  std::vector<std::string> keys() const;

  void set(const std::string& key, std::string value, std::size_t line);
  void check_all_used() const;

 private:
  struct Entry {
    std::string value;
    std::size_t line;
  };
  const Entry& entry(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

  std::string name_;
  std::size_t line_ = 0;
  std::map<std::string, Entry> entries_;
  std::vector<std::string> order_;
  mutable std::set<std::string> used_;
};

class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "<config>");
  static Config load(const std::string& path);

  const std::string& text() const noexcept { return text_; }
  const std::string& origin() const noexcept { return origin_; }

  bool has_section(const std::string& name) const;
  // Marks the section as consumed. Missing sections read as empty.
  const ConfigSection& section(const std::string& name) const;
  // Lookup that does not mark the section as consumed; nullptr if absent.
  const ConfigSection* find(const std::string& name) const;
  // Names of sections "<prefix>.<suffix>", in file order; returns suffixes.
  std::vector<std::string> subsections(const std::string& prefix) const;

  // Throws ConfigError for any section or key that was never read. Sections
  // named in `other` (or "<other>.<suffix>") that were never read are
  // skipped; they belong to a different subcommand sharing the file.
  void check_all_used(const std::vector<std::string>& other = {}) const;

 private:
  std::string text_;
  std::string origin_;
  std::map<std::string, ConfigSection> sections_;
  std::vector<std::string> order_;
  mutable std::set<std::string> used_;
  ConfigSection empty_;
};

}  // namespace rdsim
