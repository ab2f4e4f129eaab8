#pragma once

// UTF-8 structured text configuration: "key = value" lines grouped under
// "[section]" headers; '#' and ';' start comments. Nested blocks use dotted
// section names ([map.F], [map.F.0], ...).

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qrlab {

struct ConfigEntry {
  std::string value;
  int line = 0;
  int column = 0;      // 1-based column of the value
  int key_column = 0;  // 1-based column of the key
};

class ConfigSection {
 public:
  ConfigSection(std::string name, int line, std::string source)
      : name_(std::move(name)), line_(line), source_(std::move(source)) {}

  const std::string& name() const { return name_; }
  int line() const { return line_; }
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::map<std::string, ConfigEntry>& entries() const { return entries_; }

  const ConfigEntry& entry(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;

  // Rejects any key outside `allowed`, naming it with its position.
  void expect_keys(const std::vector<std::string>& allowed) const;

  // Throws a config error pointing at `key`.
  [[noreturn]] void error_at(const std::string& key, const std::string& message) const;

  void add(const std::string& key, ConfigEntry e, int line, int column);

 private:
  std::string name_;
  int line_;
  std::string source_;
  std::map<std::string, ConfigEntry> entries_;
};

class ConfigDocument {
 public:
  static ConfigDocument parse(const std::string& text, const std::string& source = "<config>");
  static ConfigDocument load(const std::string& path);

  const std::string& source() const { return source_; }
  const ConfigSection* find(const std::string& name) const;
  const ConfigSection& section(const std::string& name) const;
  const std::vector<ConfigSection>& sections() const { return sections_; }

  // Rejects any section whose name is neither in `allowed` nor starts with one
  // of `allowed_prefixes`.
  void expect_sections(const std::vector<std::string>& allowed, const std::vector<std::string>& allowed_prefixes) const;

 private:
  std::string source_;
  std::vector<ConfigSection> sections_;
};

}  // namespace qrlab
