#include "qrlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "qrlab/error.hpp"

namespace qrlab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void config_error(const std::string& source, int line, int column, const std::string& msg) {
  std::ostringstream os;
  os << source << ':' << line << ':' << column << ": " << msg;
  fail(ErrorKind::config, os.str());
}

bool valid_name(const std::string& s, bool allow_dots) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [&](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || (allow_dots && c == '.');
  });
}

}  // namespace

const ConfigEntry& ConfigSection::entry(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) config_error(source_, line_, 1, "section [" + name_ + "] is missing required key '" + key + "'");
  return it->second;
}

void ConfigSection::error_at(const std::string& key, const std::string& message) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) config_error(source_, line_, 1, message);
  config_error(source_, it->second.line, it->second.column, message);
}

std::string ConfigSection::get_string(const std::string& key) const { return entry(key).value; }

std::string ConfigSection::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? entry(key).value : fallback;
}

double ConfigSection::get_double(const std::string& key) const {
  const ConfigEntry& e = entry(key);
  double v = 0.0;
  const char* b = e.value.data();
  const char* end = b + e.value.size();
  auto [p, ec] = std::from_chars(b, end, v);
  if (ec != std::errc() || p != end) error_at(key, "key '" + key + "' expects a real number, got '" + e.value + "'");
  return v;
}

double ConfigSection::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long long ConfigSection::get_int(const std::string& key) const {
  const ConfigEntry& e = entry(key);
  long long v = 0;
  const char* b = e.value.data();
  const char* end = b + e.value.size();
  auto [p, ec] = std::from_chars(b, end, v);
  if (ec != std::errc() || p != end) error_at(key, "key '" + key + "' expects an integer, got '" + e.value + "'");
  return v;
}

long long ConfigSection::get_int(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::vector<std::string> ConfigSection::get_list(const std::string& key) const {
  std::vector<std::string> out;
  std::stringstream ss(entry(key).value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::vector<double> ConfigSection::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& item : get_list(key)) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || p != item.data() + item.size())
      error_at(key, "key '" + key + "' expects a list of reals, got '" + item + "'");
    out.push_back(v);
  }
  return out;
}

void ConfigSection::expect_keys(const std::vector<std::string>& allowed) const {
  for (const auto& [key, e] : entries_) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      config_error(source_, e.line, e.key_column, "unknown key '" + key + "' in section [" + name_ + "]");
    }
  }
}

void ConfigSection::add(const std::string& key, ConfigEntry e, int line, int column) {
  if (entries_.count(key)) config_error(source_, line, column, "duplicate key '" + key + "' in section [" + name_ + "]");
  entries_.emplace(key, std::move(e));
}

ConfigDocument ConfigDocument::parse(const std::string& text, const std::string& source) {
  ConfigDocument doc;
  doc.source_ = source;
  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    std::string line = raw;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const int col0 = static_cast<int>(first) + 1;

    if (line[first] == '[') {
      const auto close = line.find(']', first);
      if (close == std::string::npos) config_error(source, line_no, col0, "unterminated section header");
      if (!trim(line.substr(close + 1)).empty())
        config_error(source, line_no, static_cast<int>(close) + 2, "trailing characters after section header");
      const std::string name = trim(line.substr(first + 1, close - first - 1));
      if (!valid_name(name, true)) config_error(source, line_no, col0 + 1, "invalid section name '" + name + "'");
      if (doc.find(name)) config_error(source, line_no, col0, "duplicate section [" + name + "]");
      doc.sections_.emplace_back(name, line_no, source);
      continue;
    }

    const auto eq = line.find('=', first);
    if (eq == std::string::npos) config_error(source, line_no, col0, "expected 'key = value'");
    const std::string key = trim(line.substr(first, eq - first));
    if (!valid_name(key, false)) config_error(source, line_no, col0, "invalid key '" + key + "'");
    if (doc.sections_.empty()) config_error(source, line_no, col0, "key '" + key + "' appears before any [section]");
    const std::string value_part = line.substr(eq + 1);
    const auto vstart = value_part.find_first_not_of(" \t\r");
    const int vcol = static_cast<int>(eq) + 2 + (vstart == std::string::npos ? 0 : static_cast<int>(vstart));
    const std::string value = trim(value_part);
    if (value.empty()) config_error(source, line_no, vcol, "key '" + key + "' has an empty value");
    doc.sections_.back().add(key, ConfigEntry{value, line_no, vcol, col0}, line_no, col0);
  }
  return doc;
}

ConfigDocument ConfigDocument::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::config, path + ": cannot open configuration file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

const ConfigSection* ConfigDocument::find(const std::string& name) const {
  for (const auto& s : sections_)
    if (s.name() == name) return &s;
  return nullptr;
}

const ConfigSection& ConfigDocument::section(const std::string& name) const {
  const ConfigSection* s = find(name);
  if (!s) fail(ErrorKind::config, source_ + ": missing section [" + name + "]");
  return *s;
}

void ConfigDocument::expect_sections(const std::vector<std::string>& allowed,
                                     const std::vector<std::string>& allowed_prefixes) const {
  for (const auto& s : sections_) {
    if (std::find(allowed.begin(), allowed.end(), s.name()) != allowed.end()) continue;
    const bool prefixed = std::any_of(allowed_prefixes.begin(), allowed_prefixes.end(),
                                      [&](const std::string& p) { return s.name().rfind(p, 0) == 0; });
    if (!prefixed) config_error(source_, s.line(), 1, "unknown section [" + s.name() + "]");
  }
}

}  // namespace qrlab
